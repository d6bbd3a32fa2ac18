//! Pairwise interaction weights: how many migrations a pair of qubits needs
//! when homed on different computers.

use std::collections::BTreeMap;

use crate::circuit::{Circuit, CircuitView, GateOp};
use crate::error::{Error, Result};
use crate::{Instant, Qubit};

/// Minimum number of home-covering migrations for a two-qubit circuit whose
/// qubits live on distinct computers.
pub fn ms_hc_count(pair: &Circuit) -> Result<u32> {
    if pair.num_qubits() != 2 {
        return Err(Error::NotTwoQubits(pair.num_qubits()));
    }
    let view = pair.view();
    let unary = view.unary_instants();
    let binary: Vec<Instant> = view.binary_gates().map(|g| g.instant).collect();
    Ok(pair_cover_count(view, &binary, &unary[0], &unary[1]))
}

/// Furthest-right greedy interval cover.
///
/// Each CZ at `t` can be served by the unary-free interval of either operand
/// that contains `t`. Sweeping from the left, the earliest uncovered gate
/// takes whichever of its two intervals reaches further right (ties go to the
/// first qubit), and every gate inside that interval is covered.
pub(crate) fn pair_cover_count(
    view: CircuitView<'_>,
    binary: &[Instant],
    unary_a: &[Instant],
    unary_b: &[Instant],
) -> u32 {
    let mut count = 0;
    let mut i = 0;
    while i < binary.len() {
        let t = binary[i];
        let (_, hi_a) = view.free_interval(unary_a, t);
        let (_, hi_b) = view.free_interval(unary_b, t);
        let hi = hi_a.max(hi_b);
        while i < binary.len() && binary[i] < hi {
            i += 1;
        }
        count += 1;
    }
    count
}

/// Symmetric matrix of pairwise migration estimates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionMatrix {
    n: usize,
    w: Vec<u32>,
    /// Non-zero neighbours per qubit.
    adj: Vec<Vec<(Qubit, u32)>>,
}

impl InteractionMatrix {
    pub fn zeros(n: usize) -> Self {
        InteractionMatrix {
            n,
            w: vec![0; n * n],
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a matrix from unordered weighted pairs; later entries overwrite.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (Qubit, Qubit, u32)>) -> Self {
        let mut m = InteractionMatrix::zeros(n);
        for (a, b, w) in pairs {
            assert!(a != b, "interaction matrix has a zero diagonal");
            m.w[a * n + b] = w;
            m.w[b * n + a] = w;
        }
        for a in 0..n {
            m.adj[a] = (0..n)
                .filter_map(|b| {
                    let w = m.w[a * n + b];
                    (w > 0).then_some((b, w))
                })
                .collect();
        }
        m
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: Qubit, b: Qubit) -> u32 {
        self.w[a * self.n + b]
    }

    pub fn neighbors(&self, q: Qubit) -> &[(Qubit, u32)] {
        &self.adj[q]
    }
}

/// `w(q1, q2)` for every pair sharing a CZ in the view, via the induced pair
/// circuit; zero elsewhere.
pub fn interaction_matrix(view: CircuitView<'_>) -> InteractionMatrix {
    let mut shared: BTreeMap<(Qubit, Qubit), Vec<Instant>> = BTreeMap::new();
    for g in view.gates() {
        if let GateOp::Cz(a, b) = g.op {
            shared.entry((a.min(b), a.max(b))).or_default().push(g.instant);
        }
    }
    let unary = view.unary_instants();
    let pairs = shared.iter().map(|(&(a, b), binary)| {
        (a, b, pair_cover_count(view, binary, &unary[a], &unary[b]))
    });
    InteractionMatrix::from_pairs(view.num_qubits(), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateOp::{Cz, Unary};
    use crate::fixtures;
    use crate::oracle::oracle_pair_cover;
    use proptest::prelude::*;

    fn pair(ops: Vec<GateOp>) -> Circuit {
        Circuit::new(2, ops).unwrap()
    }

    #[test]
    fn one_interval_covers_both() {
        let c = pair(vec![Cz(0, 1), Unary(0), Cz(0, 1)]);
        assert_eq!(ms_hc_count(&c).unwrap(), 1);
        assert_eq!(oracle_pair_cover(&c).unwrap(), 1);
    }

    #[test]
    fn both_qubits_broken() {
        let c = pair(vec![Cz(0, 1), Unary(0), Unary(1), Cz(0, 1)]);
        assert_eq!(ms_hc_count(&c).unwrap(), 2);
        assert_eq!(oracle_pair_cover(&c).unwrap(), 2);
    }

    #[test]
    fn no_binary_gates() {
        assert_eq!(ms_hc_count(&pair(vec![Unary(0), Unary(1)])).unwrap(), 0);
        assert_eq!(ms_hc_count(&pair(vec![])).unwrap(), 0);
        let three = Circuit::new(3, [Cz(0, 1)]).unwrap();
        assert_eq!(ms_hc_count(&three), Err(Error::NotTwoQubits(3)));
    }

    #[test]
    fn matrix_of_unary_only_circuit_is_zero() {
        let c = Circuit::new(3, [Unary(0), Unary(2)]).unwrap();
        let w = interaction_matrix(c.view());
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(w.get(a, b), 0);
            }
        }
    }

    #[test]
    fn single_cz_weight() {
        let c = Circuit::new(2, [Cz(0, 1)]).unwrap();
        let w = interaction_matrix(c.view());
        assert_eq!(w.get(0, 1), 1);
        assert_eq!(w.get(1, 0), 1);
    }

    #[test]
    fn two_phase_weights() {
        let (c, _) = fixtures::two_phase();
        let w = interaction_matrix(c.view());
        let expect = |a: usize, b: usize| match (a.min(b), a.max(b)) {
            (0, 1) | (2, 3) | (0, 2) | (1, 3) => 1,
            _ => 0,
        };
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(w.get(a, b), expect(a, b), "pair ({a},{b})");
                if a != b && w.get(a, b) > 0 {
                    let (p, _) = c.induced_pair(a, b).unwrap();
                    assert_eq!(oracle_pair_cover(&p).unwrap(), w.get(a, b));
                }
            }
        }
    }

    fn arb_pair_circuit(max: usize) -> impl Strategy<Value = Circuit> {
        prop::collection::vec(
            prop_oneof![Just(Cz(0, 1)), Just(Cz(1, 0)), Just(Unary(0)), Just(Unary(1))],
            0..=max,
        )
        .prop_map(pair)
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        (2usize..5).prop_flat_map(|n| {
            prop::collection::vec(
                prop_oneof![
                    (0..n).prop_map(Unary),
                    (0..n, 1..n).prop_map(move |(a, d)| Cz(a, (a + d) % n)),
                ],
                0..25,
            )
            .prop_map(move |ops| Circuit::new(n, ops).unwrap())
        })
    }

    proptest! {
        #[test]
        fn greedy_matches_exhaustive(c in arb_pair_circuit(8)) {
            prop_assert_eq!(ms_hc_count(&c).unwrap(), oracle_pair_cover(&c).unwrap());
        }

        #[test]
        fn count_bounds(c in arb_pair_circuit(12)) {
            let k = ms_hc_count(&c).unwrap();
            let binary = c.gates().iter().filter(|g| g.is_binary()).count() as u32;
            prop_assert!(k <= binary);
            prop_assert_eq!(k >= 1, binary >= 1);
        }

        #[test]
        fn deleting_a_cz_never_increases(c in arb_pair_circuit(12), pick in any::<prop::sample::Index>()) {
            let cz: Vec<usize> = (0..c.num_gates()).filter(|&i| c.gates()[i].is_binary()).collect();
            prop_assume!(!cz.is_empty());
            let drop = cz[pick.index(cz.len())];
            let fewer = pair(
                c.gates().iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, g)| g.op).collect(),
            );
            prop_assert!(ms_hc_count(&fewer).unwrap() <= ms_hc_count(&c).unwrap());
        }

        #[test]
        fn matrix_agrees_with_induced_route(c in arb_circuit()) {
            let w = interaction_matrix(c.view());
            for a in 0..c.num_qubits() {
                prop_assert_eq!(w.get(a, a), 0);
                for b in a + 1..c.num_qubits() {
                    let (p, _) = c.induced_pair(a, b).unwrap();
                    let shares = p.gates().iter().any(|g| g.is_binary());
                    let expected = if shares { ms_hc_count(&p).unwrap() } else { 0 };
                    prop_assert_eq!(w.get(a, b), expected);
                    prop_assert_eq!(w.get(b, a), expected);
                }
            }
        }
    }
}
