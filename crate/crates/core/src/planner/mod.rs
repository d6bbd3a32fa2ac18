//! Full distribution plans: per-segment assignments, migrations, and the
//! teleportations at segment boundaries.

mod cuts;
mod validate;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cuts::{
    candidate_cuts, merge_adjacent_migrations, overall_plan, sequence_plan, sequence_search,
    split_plan, split_search, CutSearch,
};
pub use validate::{validate_plan, PlanViolation};

use crate::circuit::{Circuit, CircuitView};
use crate::coverage::{greedy_cover, iterative_cover, total_cost, CoverMode, Migration};
use crate::error::Result;
use crate::interaction::interaction_matrix;
use crate::network::{DistanceMatrix, Network};
use crate::repair::repair;
use crate::tabu::{tabu_search, Assignment, TabuParams};
use crate::{Cost, Instant, Node, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Teleportation {
    pub qubit: Qubit,
    pub target: Node,
    pub instant: Instant,
    pub cost: Cost,
}

/// How a segment's non-local gates get covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverStrategy {
    /// Iterated budgeted selection.
    #[default]
    Budgeted,
    /// Most-gates-first baseline.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlanParams {
    pub tabu: TabuParams,
    pub cover: CoverStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Instant,
    pub end: Instant,
    pub assignment: Assignment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub cuts: Vec<Instant>,
    pub segments: Vec<Segment>,
    pub migrations: Vec<Migration>,
    pub teleports: Vec<Teleportation>,
    pub total_cost: Cost,
}

impl Plan {
    pub fn migration_cost(&self) -> Cost {
        total_cost(&self.migrations)
    }

    pub fn teleport_cost(&self) -> Cost {
        self.teleports.iter().map(|t| t.cost).sum()
    }

    /// Assignment in force at instant `t` (at a cut, the one starting there).
    pub fn assignment_at(&self, t: Instant) -> Option<&Assignment> {
        self.segments
            .iter()
            .find(|s| s.start <= t && t < s.end)
            .or_else(|| self.segments.last().filter(|s| s.end == t))
            .map(|s| &s.assignment)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }
}

/// One window solved by the assignment-then-cover pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSolution {
    pub start: Instant,
    pub end: Instant,
    pub assignment: Assignment,
    pub migrations: Vec<Migration>,
    pub cost: Cost,
}

/// Tabu assignment on the window's interaction matrix, then a migration
/// cover and capacity repair.
pub fn solve_segment(
    view: CircuitView<'_>,
    net: &Network,
    d: &DistanceMatrix,
    params: &PlanParams,
    seed: Option<&Assignment>,
) -> Result<SegmentSolution> {
    let w = interaction_matrix(view);
    let assignment = tabu_search(&w, net, d, &params.tabu, seed)?;
    let cover = match params.cover {
        CoverStrategy::Budgeted => iterative_cover(view, &assignment, net, d, CoverMode::General)?,
        CoverStrategy::Greedy => greedy_cover(view, &assignment, net, d)?,
    };
    let migrations = repair(&cover, net, view, &assignment)?;
    Ok(SegmentSolution {
        start: view.start(),
        end: view.end(),
        cost: total_cost(&migrations),
        assignment,
        migrations,
    })
}

/// One teleportation per qubit whose home differs, costed by hop distance.
pub fn teleports_between(
    prev: &Assignment,
    next: &Assignment,
    t: Instant,
    d: &DistanceMatrix,
) -> (Vec<Teleportation>, Cost) {
    let teleports: Vec<Teleportation> = (0..prev.num_qubits())
        .filter(|&q| prev.home(q) != next.home(q))
        .map(|q| Teleportation {
            qubit: q,
            target: next.home(q),
            instant: t,
            cost: d.get(prev.home(q), next.home(q)).into(),
        })
        .collect();
    let cost = teleports.iter().map(|t| t.cost).sum();
    (teleports, cost)
}

pub(crate) fn teleport_cost(prev: &Assignment, next: &Assignment, d: &DistanceMatrix) -> Cost {
    (0..prev.num_qubits())
        .map(|q| Cost::from(d.get(prev.home(q), next.home(q))))
        .sum()
}

/// Stitches consecutive segment solutions into a plan.
pub fn assemble(solutions: &[SegmentSolution], d: &DistanceMatrix) -> Plan {
    let mut plan = Plan {
        cuts: Vec::new(),
        segments: Vec::new(),
        migrations: Vec::new(),
        teleports: Vec::new(),
        total_cost: 0,
    };
    for (i, s) in solutions.iter().enumerate() {
        if i > 0 {
            plan.cuts.push(s.start);
            let (tps, _) = teleports_between(&solutions[i - 1].assignment, &s.assignment, s.start, d);
            plan.teleports.extend(tps);
        }
        plan.segments.push(Segment {
            start: s.start,
            end: s.end,
            assignment: s.assignment.clone(),
        });
        plan.migrations.extend(s.migrations.iter().copied());
    }
    plan.total_cost = plan.migration_cost() + plan.teleport_cost();
    plan
}

/// Plain assignment-then-cover over the whole circuit, no teleportation.
pub fn dqcm_plan(c: &Circuit, net: &Network, d: &DistanceMatrix, params: &PlanParams) -> Result<Plan> {
    let sol = solve_segment(c.view(), net, d, params, None)?;
    Ok(assemble(&[sol], d))
}

/// Memoized segment solves keyed by span and seed assignment.
pub(crate) struct Solver<'a> {
    pub circuit: &'a Circuit,
    pub net: &'a Network,
    pub d: &'a DistanceMatrix,
    pub params: &'a PlanParams,
    memo: HashMap<(Instant, Instant, Option<Assignment>), SegmentSolution>,
}

impl<'a> Solver<'a> {
    pub fn new(
        circuit: &'a Circuit,
        net: &'a Network,
        d: &'a DistanceMatrix,
        params: &'a PlanParams,
    ) -> Self {
        Solver {
            circuit,
            net,
            d,
            params,
            memo: HashMap::new(),
        }
    }

    pub fn solve(
        &mut self,
        start: Instant,
        end: Instant,
        seed: Option<&Assignment>,
    ) -> Result<SegmentSolution> {
        let key = (start, end, seed.cloned());
        if let Some(sol) = self.memo.get(&key) {
            return Ok(sol.clone());
        }
        let view = self.circuit.span(start, end);
        let sol = solve_segment(view, self.net, self.d, self.params, seed)?;
        self.memo.insert(key, sol.clone());
        Ok(sol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateOp::*;
    use crate::fixtures;

    #[test]
    fn teleport_examples() {
        let net = Network::path(vec![2, 2, 2], vec![1; 3]).unwrap();
        let d = net.distances().unwrap();
        let a = Assignment::new(vec![0, 1, 0]);
        assert_eq!(teleports_between(&a, &a, 4, &d), (vec![], 0));
        let swapped = Assignment::new(vec![1, 0, 0]);
        let (tps, cost) = teleports_between(&a, &swapped, 4, &d);
        assert_eq!((tps.len(), cost), (2, 2));
        let far = Assignment::new(vec![2, 1, 0]);
        assert_eq!(teleports_between(&a, &far, 4, &d).1, 2);
    }

    #[test]
    fn segment_without_binary_gates() {
        let c = Circuit::new(2, [Unary(0), Unary(1)]).unwrap();
        let net = fixtures::two_node_network();
        let d = net.distances().unwrap();
        let sol = solve_segment(c.view(), &net, &d, &PlanParams::default(), None).unwrap();
        assert_eq!(sol.cost, 0);
        assert!(sol.migrations.is_empty());
    }

    #[test]
    fn forced_split_costs_one() {
        let c = Circuit::new(2, [Cz(0, 1)]).unwrap();
        let net = Network::complete(vec![1, 1], vec![1, 1]).unwrap();
        let d = net.distances().unwrap();
        let sol = solve_segment(c.view(), &net, &d, &PlanParams::default(), None).unwrap();
        assert_eq!((sol.cost, sol.migrations.len()), (1, 1));
    }

    #[test]
    fn first_phase_of_two_phase_is_local() {
        let (c, net) = fixtures::two_phase();
        let d = net.distances().unwrap();
        let sol = solve_segment(c.span(0, 12), &net, &d, &PlanParams::default(), None).unwrap();
        assert_eq!(sol.cost, 0);
        let h = sol.assignment.homes();
        assert_eq!(h[0], h[1]);
        assert_eq!(h[2], h[3]);
    }

    #[test]
    fn plan_json_round_trip() {
        let (c, net) = fixtures::two_phase();
        let d = net.distances().unwrap();
        let plan = dqcm_plan(&c, &net, &d, &PlanParams::default()).unwrap();
        let text = plan.to_json();
        assert_eq!(Plan::from_json(&text).unwrap(), plan);
        assert!(text.contains("\"t_s\""));
    }
}
