//! Heterogeneous quantum networks: topology, per-node capacities, hop distances.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Node;

/// Undirected connected network of quantum computers.
///
/// `storage[p]` bounds the original qubits homed at `p`; `exec_mem[p]` bounds
/// the linked copies `p` holds at any gate instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    num_nodes: usize,
    edges: Vec<[Node; 2]>,
    storage: Vec<u32>,
    exec_mem: Vec<u32>,
}

impl Network {
    /// Builds a network, normalizing edges to `[min, max]` sorted order.
    /// Connectivity is checked by [`Network::distances`].
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (Node, Node)>,
        storage: Vec<u32>,
        exec_mem: Vec<u32>,
    ) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidNetwork("no nodes".into()));
        }
        if storage.len() != num_nodes || exec_mem.len() != num_nodes {
            return Err(Error::InvalidNetwork(format!(
                "capacity vectors must have {num_nodes} entries"
            )));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::InvalidNetwork(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidNetwork(format!("self-loop at {u}")));
            }
            if !set.insert([u.min(v), u.max(v)]) {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(Network {
            num_nodes,
            edges: set.into_iter().collect(),
            storage,
            exec_mem,
        })
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(storage: Vec<u32>, exec_mem: Vec<u32>) -> Result<Self> {
        let n = storage.len();
        Network::new(n, (1..n).map(|i| (i - 1, i)), storage, exec_mem)
    }

    pub fn complete(storage: Vec<u32>, exec_mem: Vec<u32>) -> Result<Self> {
        let n = storage.len();
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Network::new(n, edges, storage, exec_mem)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[[Node; 2]] {
        &self.edges
    }

    pub fn storage(&self) -> &[u32] {
        &self.storage
    }

    pub fn exec_mem(&self) -> &[u32] {
        &self.exec_mem
    }

    pub fn with_exec_mem(mut self, exec_mem: Vec<u32>) -> Result<Self> {
        if exec_mem.len() != self.num_nodes {
            return Err(Error::InvalidNetwork("exec_mem length".into()));
        }
        self.exec_mem = exec_mem;
        Ok(self)
    }

    pub fn adjacency(&self) -> Vec<Vec<Node>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &[u, v] in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        bfs(&self.adjacency(), 0).iter().all(Option::is_some)
    }

    /// All-pairs hop distances by breadth-first search from every node.
    pub fn distances(&self) -> Result<DistanceMatrix> {
        let adj = self.adjacency();
        let n = self.num_nodes;
        let mut dist = vec![0; n * n];
        for s in 0..n {
            for (t, d) in bfs(&adj, s).into_iter().enumerate() {
                dist[s * n + t] = d.ok_or(Error::Disconnected)?;
            }
        }
        Ok(DistanceMatrix { n, dist })
    }

    /// Ok iff total storage can hold `num_qubits`.
    pub fn check_capacity(&self, num_qubits: usize) -> Result<()> {
        let total: usize = self.storage.iter().map(|&s| s as usize).sum();
        if total >= num_qubits {
            Ok(())
        } else {
            Err(Error::InsufficientStorage {
                deficit: num_qubits - total,
            })
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Network = serde_json::from_str(text)?;
        Network::new(
            raw.num_nodes,
            raw.edges.iter().map(|&[u, v]| (u, v)),
            raw.storage,
            raw.exec_mem,
        )
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network serializes");
        s.push('\n');
        s
    }
}

fn bfs(adj: &[Vec<Node>], source: Node) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Hop counts between every pair of nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, u: Node, v: Node) -> u32 {
        self.dist[u * self.n + v]
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn path_distances() {
        let net = Network::path(vec![1; 3], vec![1; 3]).unwrap();
        let d = net.distances().unwrap();
        assert_eq!(d.get(0, 2), 2);
        assert_eq!(d.get(2, 0), 2);
        assert_eq!(d.diameter(), 2);
    }

    #[test]
    fn complete_graph_distances() {
        let d = Network::complete(vec![1; 4], vec![1; 4]).unwrap().distances().unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(d.get(u, v), u32::from(u != v));
            }
        }
        assert_eq!(d.diameter(), 1);
    }

    #[test]
    fn single_node_and_disconnected() {
        let one = Network::new(1, [], vec![3], vec![1]).unwrap();
        assert_eq!(one.distances().unwrap().diameter(), 0);
        let two = Network::new(2, [], vec![1, 1], vec![1, 1]).unwrap();
        assert_eq!(two.distances(), Err(Error::Disconnected));
        assert!(!two.is_connected());
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(Network::new(2, [(0, 0)], vec![1, 1], vec![1, 1]).is_err());
        assert!(Network::new(2, [(0, 1), (1, 0)], vec![1, 1], vec![1, 1]).is_err());
        assert!(Network::new(2, [(0, 2)], vec![1, 1], vec![1, 1]).is_err());
        assert!(Network::new(2, [(0, 1)], vec![1], vec![1, 1]).is_err());
    }

    #[test]
    fn capacity_check() {
        let net = |s: Vec<u32>| Network::complete(s, vec![1, 1]).unwrap();
        assert!(net(vec![2, 2]).check_capacity(4).is_ok());
        assert_eq!(
            net(vec![1, 1]).check_capacity(3),
            Err(Error::InsufficientStorage { deficit: 1 })
        );
        assert!(net(vec![0, 5]).check_capacity(5).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let net = Network::new(3, [(2, 1), (0, 1)], vec![1, 2, 3], vec![1, 1, 2]).unwrap();
        let text = net.to_json();
        let back = Network::from_json(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_json(), text);
    }

    proptest! {
        #[test]
        fn distances_form_a_metric(n in 1usize..9, bits in any::<u64>()) {
            // random graph plus a spanning path so it stays connected
            let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
            let mut k = 0;
            for u in 0..n {
                for v in u + 2..n {
                    if bits >> (k % 64) & 1 == 1 {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            let net = Network::new(n, edges, vec![1; n], vec![1; n]).unwrap();
            let d = net.distances().unwrap();
            // Floyd-Warshall as an independent oracle
            let inf = u32::MAX / 4;
            let mut fw = vec![vec![inf; n]; n];
            for u in 0..n {
                fw[u][u] = 0;
            }
            for &[u, v] in net.edges() {
                fw[u][v] = 1;
                fw[v][u] = 1;
            }
            for m in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        fw[u][v] = fw[u][v].min(fw[u][m] + fw[m][v]);
                    }
                }
            }
            for u in 0..n {
                for v in 0..n {
                    prop_assert_eq!(d.get(u, v), fw[u][v]);
                    prop_assert_eq!(d.get(u, v), d.get(v, u));
                    prop_assert_eq!(d.get(u, v) == 0, u == v);
                    for w in 0..n {
                        prop_assert!(d.get(u, w) <= d.get(u, v) + d.get(v, w));
                    }
                }
            }
        }
    }
}
