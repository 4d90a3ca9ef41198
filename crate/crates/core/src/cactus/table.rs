use std::collections::BTreeMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use super::graph::{classify_labels, MAX_GRAPH_Q};
use super::partition::all_partitions;
use crate::error::{Error, Result};

/// Default enumeration limit: `Bell(8)^2` is about 1.7e7 classifications.
pub const Q_MAX: usize = 8;

/// Key `(I_i, I_j, b)` of a count table.
pub type CountKey = (usize, usize, usize);

/// `A(q, I_i, I_j, b)`: admissible coincidence graphs with `2q` edges,
/// `I_i` i-identifications, `I_j` j-identifications and `b` two-cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CactusCountTable {
    pub q: usize,
    pub counts: BTreeMap<CountKey, u64>,
    /// Partition pairs examined, `Bell(q)^2`.
    pub classified: u64,
    pub admissible: u64,
}

impl CactusCountTable {
    pub fn get(&self, i_ids: usize, j_ids: usize, b: usize) -> u64 {
        self.counts.get(&(i_ids, j_ids, b)).copied().unwrap_or(0)
    }

    /// Writes `q,I_i,I_j,b,count` rows.
    pub fn write_csv<W: Write>(&self, writer: W, with_header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        if with_header {
            w.write_record(["q", "I_i", "I_j", "b", "count"])?;
        }
        for (&(ii, ij, b), &c) in &self.counts {
            w.write_record([
                self.q.to_string(),
                ii.to_string(),
                ij.to_string(),
                b.to_string(),
                c.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exhaustive count table for `q <= Q_MAX`.
pub fn count_table(q: usize) -> Result<CactusCountTable> {
    count_table_with_limit(q, Q_MAX)
}

/// Same as [`count_table`] with a caller-chosen capacity (at most the
/// classifier's hard limit).
pub fn count_table_with_limit(q: usize, limit: usize) -> Result<CactusCountTable> {
    let limit = limit.min(MAX_GRAPH_Q);
    if q == 0 {
        return Err(Error::invalid("q must be at least 1"));
    }
    if q > limit {
        return Err(Error::Capacity {
            what: "cactus enumeration q",
            requested: q,
            limit,
        });
    }
    let partitions = all_partitions(q);
    // Dense accumulator indexed by (I_i, I_j, b).
    let dims = (q + 1, q + 1, 2 * q + 2);
    let index = |ii: usize, ij: usize, b: usize| (ii * dims.1 + ij) * dims.2 + b;
    let size = dims.0 * dims.1 * dims.2;

    let (dense, admissible) = partitions
        .par_iter()
        .map(|pi| {
            let mut local = vec![0u64; size];
            let mut adm = 0u64;
            for pj in &partitions {
                let s = classify_labels(pi.labels(), pi.block_count(), pj.labels(), pj.block_count());
                if s.admissible {
                    assert_eq!(
                        s.cycle_count,
                        s.i_identifications + s.j_identifications + 1,
                        "admissible graph is not a cactus"
                    );
                    local[index(s.i_identifications, s.j_identifications, s.two_cycles)] += 1;
                    adm += 1;
                }
            }
            (local, adm)
        })
        .reduce(
            || (vec![0u64; size], 0u64),
            |(mut a, na), (b, nb)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                (a, na + nb)
            },
        );

    let mut counts = BTreeMap::new();
    for ii in 0..dims.0 {
        for ij in 0..dims.1 {
            for b in 0..dims.2 {
                let c = dense[index(ii, ij, b)];
                if c > 0 {
                    counts.insert((ii, ij, b), c);
                }
            }
        }
    }
    let n = partitions.len() as u64;
    Ok(CactusCountTable {
        q,
        counts,
        classified: n * n,
        admissible,
    })
}

/// Memoized [`count_table`]; tables are immutable once built.
pub fn cached_count_table(q: usize) -> Result<Arc<CactusCountTable>> {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<CactusCountTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("count table cache poisoned").get(&q) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(count_table(q)?);
    cache
        .lock()
        .expect("count table cache poisoned")
        .insert(q, Arc::clone(&table));
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q1_table() {
        let t = count_table(1).unwrap();
        assert_eq!(t.counts.len(), 1);
        assert_eq!(t.get(0, 0, 1), 1);
    }

    #[test]
    fn q2_table() {
        let t = count_table(2).unwrap();
        let expected: BTreeMap<_, _> = [((0, 0, 0), 1), ((1, 0, 2), 1), ((0, 1, 2), 1)].into_iter().collect();
        assert_eq!(t.counts, expected);
        assert_eq!(t.classified, 4);
        assert_eq!(t.admissible, 3);
    }

    #[test]
    fn q3_narayana_entry() {
        let t = count_table(3).unwrap();
        assert_eq!(t.get(1, 1, 3), 3);
    }

    #[test]
    fn zero_entries_outside_range() {
        for q in 1..=6 {
            let t = count_table(q).unwrap();
            for &(ii, ij, b) in t.counts.keys() {
                assert!(ii + ij < q);
                assert!(b <= ii + ij + 1);
            }
        }
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(count_table(9), Err(Error::Capacity { .. })));
        assert!(count_table(0).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        count_table(2).unwrap().write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "q,I_i,I_j,b,count\n2,0,0,0,1\n2,0,1,2,1\n2,1,0,2,1\n");
    }
}
