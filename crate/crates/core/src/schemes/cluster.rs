//! Clusters of options with similar utility ratio `b/a`. Within a cluster
//! the two parties roughly agree, so accepting one cluster aligns incentives.

use std::collections::BTreeMap;

use num_traits::Signed;
use serde::Serialize;

use crate::dynamics::{agent_best_response, ActionScheme};
use crate::error::{Error, Result};
use crate::instance::{beta_bound, Instance, OptionRef};
use crate::rational::{floor_log2, format_rational, serde_str, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub k: i64,
    pub members: Vec<OptionRef>,
    /// Principal value of accepting exactly this cluster.
    #[serde(with = "serde_str")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterPlan {
    #[serde(with = "serde_str")]
    pub beta: Rational,
    /// Nonempty clusters by ascending `k`.
    pub clusters: Vec<Cluster>,
    pub chosen_k: i64,
}

impl ClusterPlan {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn chosen(&self) -> &Cluster {
        self.clusters
            .iter()
            .find(|c| c.k == self.chosen_k)
            .expect("chosen cluster exists")
    }
}

/// Cluster `k` holds options with `b/a` in `[2^k, 2^{k+1})`.
pub fn cluster_index(a: &Rational, b: &Rational) -> i64 {
    floor_log2(&(b / a))
}

/// Requires all utilities positive. Each nonempty cluster is evaluated
/// against the agent's best response; the best one wins, lowest `k` on ties.
pub fn beta_cluster_scheme(inst: &Instance) -> Result<(ActionScheme, ClusterPlan)> {
    if inst.options().any(|o| !o.a.is_positive() || !o.b.is_positive()) {
        return Err(Error::ZeroUtility);
    }
    let beta = beta_bound(inst)?;
    let mut by_k: BTreeMap<i64, Vec<OptionRef>> = BTreeMap::new();
    for r in inst.refs() {
        let o = inst.option(r);
        by_k.entry(cluster_index(&o.a, &o.b)).or_default().push(r);
    }
    let shape = inst.shape();
    let mut clusters = Vec::with_capacity(by_k.len());
    for (k, members) in by_k {
        let scheme = ActionScheme::accepting(&shape, &members);
        let value = agent_best_response(inst, &scheme)?.1.principal_value;
        clusters.push(Cluster { k, members, value });
    }
    let mut best = 0;
    for (i, c) in clusters.iter().enumerate() {
        if c.value > clusters[best].value {
            best = i;
        }
    }
    let chosen = &clusters[best];
    let scheme = ActionScheme::accepting(&shape, &chosen.members);
    let plan = ClusterPlan {
        beta,
        chosen_k: chosen.k,
        clusters,
    };
    Ok((scheme, plan))
}

impl std::fmt::Display for ClusterPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.clusters {
            let names: Vec<String> = c.members.iter().map(ToString::to_string).collect();
            writeln!(
                f,
                "k={} {{{}}} value={}",
                c.k,
                names.join(", "),
                format_rational(&c.value)
            )?;
        }
        write!(f, "chosen k={}", self.chosen_k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_table1, gen_zero_agent_lb};
    use crate::rational::{frac, int};
    use crate::schemes::accept_all;

    #[test]
    fn table1_clusters() {
        let t = gen_table1();
        let (s, plan) = beta_cluster_scheme(&t).unwrap();
        let sets: Vec<(i64, Vec<OptionRef>)> = plan.clusters.iter().map(|c| (c.k, c.members.clone())).collect();
        assert_eq!(
            sets,
            vec![
                (-2, vec![OptionRef::new(0, 0), OptionRef::new(1, 1)]),
                (1, vec![OptionRef::new(0, 1), OptionRef::new(1, 0)]),
            ]
        );
        assert_eq!(plan.chosen_k, 1);
        assert_eq!(plan.chosen().value, frac(17, 4));
        assert_eq!(s.accepted(), vec![OptionRef::new(0, 1), OptionRef::new(1, 0)]);
    }

    #[test]
    fn aligned_instance_is_one_cluster() {
        let inst = Instance::from_triples(vec![
            vec![(frac(1, 2), int(2), int(2)), (frac(1, 2), int(5), int(5))],
            vec![(int(1), int(3), int(3))],
        ])
        .unwrap();
        let (s, plan) = beta_cluster_scheme(&inst).unwrap();
        assert_eq!(plan.num_clusters(), 1);
        assert_eq!(plan.chosen_k, 0);
        assert_eq!(s, accept_all(&inst));
    }

    #[test]
    fn half_open_boundaries() {
        assert_eq!(cluster_index(&int(1), &int(2)), 1);
        assert_eq!(cluster_index(&int(2), &int(3)), 0);
        assert_eq!(cluster_index(&int(4), &int(1)), -2);
        assert_eq!(cluster_index(&int(3), &int(1)), -2);
    }

    #[test]
    fn zero_utilities_rejected() {
        let inst = gen_zero_agent_lb(2).unwrap();
        assert_eq!(beta_cluster_scheme(&inst).unwrap_err(), Error::ZeroUtility);
    }
}
