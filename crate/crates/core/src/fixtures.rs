//! Small hand-built instances shared by tests, the CLI and the README.

use crate::circuit::{Circuit, GateOp};
use crate::network::Network;

fn cz(a: usize, b: usize) -> GateOp {
    GateOp::Cz(a, b)
}

/// Four qubits that interact as `{0,1},{2,3}` for the first six gates and as
/// `{0,2},{1,3}` afterwards, on two linked nodes with `s = [2, 2]`, `e = [1, 1]`.
pub fn two_phase() -> (Circuit, Network) {
    let circuit = Circuit::new(
        4,
        [
            cz(0, 1),
            cz(2, 3),
            GateOp::Unary(1),
            cz(0, 1),
            GateOp::Unary(2),
            cz(2, 3),
            cz(0, 2),
            cz(1, 3),
            cz(0, 2),
            cz(1, 3),
            cz(0, 2),
        ],
    )
    .expect("fixture is well formed");
    (circuit, two_node_network())
}

/// Same interaction phases as [`two_phase`], but every qubit gets a unary gate
/// between repetitions so no migration can serve more than one gate.
pub fn two_phase_broken() -> (Circuit, Network) {
    let unaries = || (0..4).map(GateOp::Unary);
    let ops: Vec<GateOp> = [cz(0, 1), cz(2, 3)]
        .into_iter()
        .chain(unaries())
        .chain([cz(0, 1), cz(2, 3), cz(0, 2), cz(1, 3)])
        .chain(unaries())
        .chain([cz(0, 2), cz(1, 3)])
        .collect();
    let circuit = Circuit::new(4, ops).expect("fixture is well formed");
    (circuit, two_node_network())
}

pub fn two_node_network() -> Network {
    Network::complete(vec![2, 2], vec![1, 1]).expect("fixture is well formed")
}
