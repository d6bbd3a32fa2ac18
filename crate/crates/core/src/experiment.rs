//! Parameter sweeps comparing the planners on generated instances.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant as Clock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::generators::{gen_circuit, gen_network, CircuitGenParams, NetworkGenParams};
use crate::network::Network;
use crate::planner::{
    dqcm_plan, overall_plan, sequence_plan, split_plan, validate_plan, CoverStrategy, Plan,
    PlanParams,
};
use crate::tabu::TabuParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dqcm,
    DqcmGreedy,
    Sequence,
    Split,
    Overall,
}

impl Algorithm {
    pub const COMPARED: [Algorithm; 4] = [
        Algorithm::Dqcm,
        Algorithm::DqcmGreedy,
        Algorithm::Sequence,
        Algorithm::Split,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dqcm => "dqcm",
            Algorithm::DqcmGreedy => "dqcm_greedy",
            Algorithm::Sequence => "sequence",
            Algorithm::Split => "split",
            Algorithm::Overall => "overall",
        }
    }

    pub fn run(self, c: &Circuit, net: &Network, seed: u64) -> Result<Plan> {
        let d = net.distances()?;
        let mut params = PlanParams {
            tabu: TabuParams {
                seed,
                ..TabuParams::default()
            },
            cover: CoverStrategy::Budgeted,
        };
        match self {
            Algorithm::Dqcm => dqcm_plan(c, net, &d, &params),
            Algorithm::DqcmGreedy => {
                params.cover = CoverStrategy::Greedy;
                dqcm_plan(c, net, &d, &params)
            }
            Algorithm::Sequence => sequence_plan(c, net, &d, &params),
            Algorithm::Split => split_plan(c, net, &d, &params),
            Algorithm::Overall => overall_plan(c, net, &d, &params),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Algorithm::Dqcm,
            Algorithm::DqcmGreedy,
            Algorithm::Sequence,
            Algorithm::Split,
            Algorithm::Overall,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| Error::InvalidParams(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    NumQubits,
    NumNodes,
    EdgeProbability,
    GatesPerQubit,
    BinaryFraction,
    ExecMem,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::NumQubits => "num_qubits",
            SweepParam::NumNodes => "num_nodes",
            SweepParam::EdgeProbability => "edge_probability",
            SweepParam::GatesPerQubit => "gates_per_qubit",
            SweepParam::BinaryFraction => "binary_fraction",
            SweepParam::ExecMem => "exec_mem",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepParam::NumQubits,
            SweepParam::NumNodes,
            SweepParam::EdgeProbability,
            SweepParam::GatesPerQubit,
            SweepParam::BinaryFraction,
            SweepParam::ExecMem,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| Error::InvalidParams(format!("unknown sweep parameter {s:?}")))
    }
}

/// Parameters held fixed while one of them varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceParams {
    pub num_qubits: usize,
    pub num_nodes: usize,
    pub edge_probability: f64,
    pub gates_per_qubit: usize,
    pub binary_fraction: f64,
    /// Same execution memory on every node; drawn per node when absent.
    pub exec_mem: Option<u32>,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            num_qubits: 20,
            num_nodes: 5,
            edge_probability: 0.5,
            gates_per_qubit: 20,
            binary_fraction: 0.5,
            exec_mem: None,
        }
    }
}

impl InstanceParams {
    pub fn with(&self, param: SweepParam, value: f64) -> Result<Self> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidParams(format!("{} needs an integer, got {v}", param.name())))
            }
        };
        let mut out = self.clone();
        match param {
            SweepParam::NumQubits => out.num_qubits = count(value)?,
            SweepParam::NumNodes => out.num_nodes = count(value)?,
            SweepParam::EdgeProbability => out.edge_probability = value,
            SweepParam::GatesPerQubit => out.gates_per_qubit = count(value)?,
            SweepParam::BinaryFraction => out.binary_fraction = value,
            SweepParam::ExecMem => out.exec_mem = Some(count(value)? as u32),
        }
        Ok(out)
    }

    /// Divides qubit and gate counts, keeping at least two qubits and one
    /// gate per qubit.
    pub fn scaled(&self, divisor: f64) -> Self {
        let div = |n: usize, min: usize| ((n as f64 / divisor).round() as usize).max(min);
        InstanceParams {
            num_qubits: div(self.num_qubits, 2),
            gates_per_qubit: div(self.gates_per_qubit, 1),
            ..self.clone()
        }
    }

    /// Circuit and network for one seed.
    pub fn generate(&self, seed: u64) -> Result<(Circuit, Network)> {
        let circuit = gen_circuit(&CircuitGenParams {
            num_qubits: self.num_qubits,
            gates_per_qubit: self.gates_per_qubit,
            binary_fraction: self.binary_fraction,
            seed,
        })?;
        let network = gen_network(&NetworkGenParams {
            num_nodes: self.num_nodes,
            edge_probability: self.edge_probability,
            exec_override: self.exec_mem,
            num_qubits: self.num_qubits,
            seed: seed ^ 0x5EED_F4E7,
            ..NetworkGenParams::default()
        })?;
        Ok((circuit, network))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub varying: SweepParam,
    pub values: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub fixed: InstanceParams,
    pub scale_factor: Option<f64>,
    /// Fill `runtime_ms`; off by default so reruns are byte-identical.
    pub timing: bool,
    pub jobs: usize,
    /// Where to write each cell's instance and plan files.
    pub plans_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            varying: SweepParam::NumQubits,
            values: vec![20.0],
            algorithms: Algorithm::COMPARED.to_vec(),
            seeds: (0..20).collect(),
            fixed: InstanceParams::default(),
            scale_factor: None,
            timing: false,
            jobs: 1,
            plans_dir: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParams("no sweep values".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParams("no algorithms".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParams("no seeds".into()));
        }
        if self.scale_factor.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::InvalidParams("scale factor must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// One CSV line. Cost columns are empty when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: String,
    pub algorithm: &'static str,
    pub seed: u64,
    pub total_cost: Option<u64>,
    pub migration_cost: Option<u64>,
    pub teleport_cost: Option<u64>,
    pub num_cuts: Option<usize>,
    pub runtime_ms: Option<u128>,
    pub valid: bool,
}

fn run_cell(
    cfg: &SweepConfig,
    params: &InstanceParams,
    value: f64,
    alg: Algorithm,
    seed: u64,
) -> SweepRow {
    let mut row = SweepRow {
        param: cfg.varying.name(),
        value: value.to_string(),
        algorithm: alg.name(),
        seed,
        total_cost: None,
        migration_cost: None,
        teleport_cost: None,
        num_cuts: None,
        runtime_ms: None,
        valid: false,
    };
    let Ok((circuit, net)) = params.generate(seed) else {
        return row;
    };
    let started = Clock::now();
    let Ok(plan) = alg.run(&circuit, &net, seed) else {
        return row;
    };
    if cfg.timing {
        row.runtime_ms = Some(started.elapsed().as_millis());
    }
    row.valid = validate_plan(&plan, &circuit, &net).is_empty();
    row.total_cost = Some(plan.total_cost);
    row.migration_cost = Some(plan.migration_cost());
    row.teleport_cost = Some(plan.teleport_cost());
    row.num_cuts = Some(plan.cuts.len());
    if let Some(dir) = &cfg.plans_dir {
        let stem = format!("{}_{}_{}", row.param, row.value, seed);
        let written = std::fs::create_dir_all(dir)
            .map_err(Error::from)
            .and_then(|_| circuit.save(dir.join(format!("{stem}.circuit.json"))))
            .and_then(|_| net.save(dir.join(format!("{stem}.network.json"))))
            .and_then(|_| plan.save(dir.join(format!("{stem}_{}.plan.json", alg.name()))));
        if written.is_err() {
            row.valid = false;
        }
    }
    row
}

/// Runs every (value, algorithm, seed) cell and returns rows ordered by
/// value, then algorithm, then seed. Failed cells become `valid = false` rows.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut values = cfg.values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    let mut seeds = cfg.seeds.clone();
    seeds.sort();
    seeds.dedup();

    let mut cells = Vec::new();
    for &v in &values {
        let mut params = cfg.fixed.with(cfg.varying, v)?;
        if let Some(div) = cfg.scale_factor {
            params = params.scaled(div);
        }
        for &alg in &algorithms {
            for &seed in &seeds {
                cells.push((params.clone(), v, alg, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|(params, v, alg, seed)| run_cell(cfg, params, *v, *alg, *seed))
            .collect()
    }))
}

pub fn rows_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record([
            "param", "value", "algorithm", "seed", "total_cost", "migration_cost",
            "teleport_cost", "num_cuts", "runtime_ms", "valid",
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepConfig {
        SweepConfig {
            varying: SweepParam::NumQubits,
            values: vec![6.0],
            algorithms: vec![Algorithm::Dqcm],
            seeds: vec![1, 2],
            fixed: InstanceParams {
                num_nodes: 3,
                gates_per_qubit: 4,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn one_value_two_seeds() {
        let csv = rows_to_csv(&run_sweep(&tiny()).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "param,value,algorithm,seed,total_cost,migration_cost,teleport_cost,num_cuts,runtime_ms,valid"
        );
        assert!(lines[1].starts_with("num_qubits,6,dqcm,1,"));
        assert!(lines[1].ends_with(",true"));
    }

    #[test]
    fn empty_seeds_rejected() {
        let cfg = SweepConfig { seeds: vec![], ..tiny() };
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn toml_config() {
        let cfg = SweepConfig::from_toml(
            "varying = \"exec_mem\"\nvalues = [1, 2]\nalgorithms = [\"dqcm\", \"split\"]\nseeds = [3]\n[fixed]\nnum_qubits = 8\n",
        )
        .unwrap();
        assert_eq!(cfg.varying, SweepParam::ExecMem);
        assert_eq!(cfg.values, vec![1.0, 2.0]);
        assert_eq!(cfg.fixed.num_qubits, 8);
        assert_eq!(cfg.fixed.num_nodes, 5);
    }

    #[test]
    fn sweep_values_must_fit_the_parameter() {
        assert!(InstanceParams::default().with(SweepParam::NumQubits, 2.5).is_err());
        let p = InstanceParams::default().with(SweepParam::ExecMem, 3.0).unwrap();
        assert_eq!(p.exec_mem, Some(3));
    }
}
