//! Coincidence graphs: quotients of the labeled bipartite `2q`-cycle
//! `i_1 - j_1 - i_2 - j_2 - ... - i_q - j_q - i_1` obtained by identifying
//! `i` labels among themselves and `j` labels among themselves.

use serde::Serialize;

use super::partition::SetPartition;
use crate::error::{Error, Result};

/// Largest `q` the fixed-size classifier supports.
pub const MAX_GRAPH_Q: usize = 12;

const MAX_V: usize = 2 * MAX_GRAPH_Q;
const MAX_E: usize = 2 * MAX_GRAPH_Q;
const NONE: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceGraph {
    q: usize,
    i_partition: SetPartition,
    j_partition: SetPartition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AdmissibilityStats {
    pub admissible: bool,
    /// `q` minus the number of distinct `i` vertices.
    pub i_identifications: usize,
    /// `q` minus the number of distinct `j` vertices.
    pub j_identifications: usize,
    /// Biconnected components made of exactly two parallel edges.
    pub two_cycles: usize,
    /// Number of biconnected components.
    pub cycle_count: usize,
}

impl CoincidenceGraph {
    pub fn new(i_partition: SetPartition, j_partition: SetPartition) -> Result<Self> {
        let q = i_partition.len();
        if q == 0 || j_partition.len() != q {
            return Err(Error::invalid("partitions must both cover {1..q} with q >= 1"));
        }
        if q > MAX_GRAPH_Q {
            return Err(Error::Capacity {
                what: "coincidence graph q",
                requested: q,
                limit: MAX_GRAPH_Q,
            });
        }
        Ok(CoincidenceGraph {
            q,
            i_partition,
            j_partition,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Edge list of the quotient multigraph; `i` blocks are vertices
    /// `0..bi`, `j` blocks follow.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let (edges, _) = cycle_edges(self.i_partition.labels(), self.j_partition.labels(), self.i_partition.block_count());
        edges[..2 * self.q].iter().map(|&(a, b)| (a as usize, b as usize)).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.i_partition.block_count() + self.j_partition.block_count()
    }

    pub fn classify(&self) -> AdmissibilityStats {
        classify_labels(
            self.i_partition.labels(),
            self.i_partition.block_count(),
            self.j_partition.labels(),
            self.j_partition.block_count(),
        )
    }
}

fn cycle_edges(i: &[u8], j: &[u8], i_blocks: usize) -> ([(u8, u8); MAX_E], usize) {
    let q = i.len();
    let mut edges = [(0u8, 0u8); MAX_E];
    for t in 0..q {
        let it = i[t];
        let jt = j[t] + i_blocks as u8;
        let inext = i[(t + 1) % q];
        edges[2 * t] = (it, jt);
        edges[2 * t + 1] = (jt, inext);
    }
    (edges, 2 * q)
}

/// Classification on raw growth strings; the enumeration hot path.
pub(crate) fn classify_labels(i: &[u8], i_blocks: usize, j: &[u8], j_blocks: usize) -> AdmissibilityStats {
    let q = i.len();
    let n_vertices = i_blocks + j_blocks;
    let (edges, n_edges) = cycle_edges(i, j, i_blocks);

    // Adjacency: every vertex of a closed walk has even degree <= 2q.
    let mut deg = [0u8; MAX_V];
    let mut adj = [[(0u8, 0u8); MAX_E]; MAX_V];
    for (e, &(a, b)) in edges[..n_edges].iter().enumerate() {
        adj[a as usize][deg[a as usize] as usize] = (b, e as u8);
        deg[a as usize] += 1;
        adj[b as usize][deg[b as usize] as usize] = (a, e as u8);
        deg[b as usize] += 1;
    }

    // Iterative lowpoint search. Parallel edges keep distinct ids, and only
    // the tree edge itself is skipped when looking back at the parent, so a
    // doubled edge shows up as a 2-cycle component.
    let mut disc = [0u8; MAX_V];
    let mut low = [0u8; MAX_V];
    // (vertex, parent edge, next adjacency slot)
    let mut stack = [(0u8, NONE, 0u8); MAX_V];
    let mut sp = 0usize;
    let mut edge_stack = [0u8; MAX_E];
    let mut esp = 0usize;
    let mut time = 1u8;

    let mut admissible = true;
    let mut two_cycles = 0usize;
    let mut components = 0usize;

    disc[0] = time;
    low[0] = time;
    stack[0] = (0, NONE, 0);
    sp += 1;

    while sp > 0 {
        let (v, parent_edge, slot) = stack[sp - 1];
        let vi = v as usize;
        if slot < deg[vi] {
            stack[sp - 1].2 += 1;
            let (w, e) = adj[vi][slot as usize];
            if e == parent_edge {
                continue;
            }
            let wi = w as usize;
            if disc[wi] == 0 {
                edge_stack[esp] = e;
                esp += 1;
                time += 1;
                disc[wi] = time;
                low[wi] = time;
                stack[sp] = (w, e, 0);
                sp += 1;
            } else if disc[wi] < disc[vi] {
                edge_stack[esp] = e;
                esp += 1;
                low[vi] = low[vi].min(disc[wi]);
            }
        } else {
            sp -= 1;
            if sp == 0 {
                break;
            }
            let u = stack[sp - 1].0 as usize;
            low[u] = low[u].min(low[vi]);
            if low[vi] >= disc[u] {
                // u is an articulation point (or the root): everything on the
                // edge stack down to the tree edge (u, v) is one component.
                let mut mask = 0u32;
                let mut count = 0usize;
                loop {
                    esp -= 1;
                    let e = edge_stack[esp];
                    let (a, b) = edges[e as usize];
                    mask |= (1 << a) | (1 << b);
                    count += 1;
                    if e == parent_edge {
                        break;
                    }
                }
                let verts = mask.count_ones() as usize;
                components += 1;
                if count != verts {
                    admissible = false;
                }
                if count == 2 && verts == 2 {
                    two_cycles += 1;
                }
            }
        }
    }
    debug_assert_eq!(esp, 0);
    debug_assert!(n_vertices <= MAX_V);

    AdmissibilityStats {
        admissible,
        i_identifications: q - i_blocks,
        j_identifications: q - j_blocks,
        two_cycles,
        cycle_count: components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(i: &[usize], j: &[usize]) -> CoincidenceGraph {
        CoincidenceGraph::new(SetPartition::from_labels(i), SetPartition::from_labels(j)).unwrap()
    }

    #[test]
    fn plain_four_cycle() {
        let s = graph(&[0, 1], &[0, 1]).classify();
        assert!(s.admissible);
        assert_eq!((s.i_identifications, s.j_identifications, s.two_cycles, s.cycle_count), (0, 0, 0, 1));
    }

    #[test]
    fn identified_i_gives_two_double_edges() {
        let s = graph(&[0, 0], &[0, 1]).classify();
        assert!(s.admissible);
        assert_eq!((s.i_identifications, s.j_identifications, s.two_cycles, s.cycle_count), (1, 0, 2, 2));
    }

    #[test]
    fn fully_identified_q2_is_not_admissible() {
        let s = graph(&[0, 0], &[0, 0]).classify();
        assert!(!s.admissible);
        assert_eq!(s.cycle_count, 1);
    }

    #[test]
    fn q1_is_a_single_two_cycle() {
        let s = graph(&[0], &[0]).classify();
        assert!(s.admissible);
        assert_eq!((s.two_cycles, s.cycle_count), (1, 1));
    }

    #[test]
    fn six_cycle_with_chord_identification() {
        // i1 = i2 on a 6-cycle splits it into a 2-cycle and a 4-cycle.
        let s = graph(&[0, 0, 1], &[0, 1, 2]).classify();
        assert!(s.admissible);
        assert_eq!((s.two_cycles, s.cycle_count), (1, 2));
        // i1 = i3 and j1 = j2: three double edges hanging off each other.
        let t = graph(&[0, 1, 0], &[0, 0, 1]).classify();
        assert!(t.admissible);
        assert_eq!((t.two_cycles, t.cycle_count), (3, 3));
    }

    #[test]
    fn edges_follow_the_cycle() {
        let g = graph(&[0, 1], &[0, 0]);
        assert_eq!(g.edges(), vec![(0, 2), (2, 1), (1, 2), (2, 0)]);
        assert_eq!(g.vertex_count(), 3);
    }

    #[test]
    fn rejects_mismatched_partitions() {
        assert!(CoincidenceGraph::new(SetPartition::discrete(2), SetPartition::discrete(3)).is_err());
        assert!(CoincidenceGraph::new(SetPartition::discrete(13), SetPartition::discrete(13)).is_err());
    }
}
