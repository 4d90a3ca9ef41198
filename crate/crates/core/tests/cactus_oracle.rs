//! Count tables checked against a brute-force classifier written from the
//! definition: a closed walk's quotient graph is admissible when every edge
//! lies on exactly one simple cycle, i.e. removing an edge leaves exactly one
//! simple path between its endpoints.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use spectral_law::cactus::{count_table, moment, narayana};
use spectral_law::stieltjes::moments_from_equation;
use spectral_law::RationalParams;

fn growth_strings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(pos: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=max + 1 {
            cur[pos] = v;
            rec(pos + 1, max.max(v), cur, out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    rec(1, 0, &mut cur, &mut out);
    out
}

fn simple_paths(edges: &[(usize, usize)], skip: usize, from: usize, to: usize, visited: &mut Vec<bool>) -> usize {
    if from == to {
        return 1;
    }
    visited[from] = true;
    let mut total = 0;
    for (e, &(a, b)) in edges.iter().enumerate() {
        if e == skip {
            continue;
        }
        let next = if a == from {
            b
        } else if b == from {
            a
        } else {
            continue;
        };
        if !visited[next] {
            total += simple_paths(edges, skip, next, to, visited);
        }
    }
    visited[from] = false;
    total
}

fn brute_table(q: usize) -> BTreeMap<(usize, usize, usize), u64> {
    let parts = growth_strings(q);
    let mut table = BTreeMap::new();
    for i in &parts {
        let bi = i.iter().max().unwrap() + 1;
        for j in &parts {
            let bj = j.iter().max().unwrap() + 1;
            let edges: Vec<(usize, usize)> = (0..q)
                .flat_map(|t| [(i[t], bi + j[t]), (bi + j[t], i[(t + 1) % q])])
                .collect();
            let n = bi + bj;
            let admissible = (0..edges.len()).all(|e| {
                let (a, b) = edges[e];
                simple_paths(&edges, e, a, b, &mut vec![false; n]) == 1
            });
            if !admissible {
                continue;
            }
            let mut mult: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for &(a, b) in &edges {
                *mult.entry((a.min(b), a.max(b))).or_default() += 1;
            }
            let two_cycles = mult.values().filter(|&&m| m == 2).count();
            *table.entry((q - bi, q - bj, two_cycles)).or_default() += 1;
        }
    }
    table
}

#[test]
fn count_tables_match_brute_force() {
    for q in 1..=5 {
        let table = count_table(q).unwrap();
        assert_eq!(table.counts, brute_table(q), "q = {q}");
    }
}

#[test]
fn total_count_is_bell_squared_bound() {
    let bell = [1u64, 1, 2, 5, 15, 52, 203];
    for q in 1..=6 {
        let table = count_table(q).unwrap();
        assert_eq!(table.classified, bell[q] * bell[q]);
        assert_eq!(table.admissible, table.counts.values().sum::<u64>());
        assert!(table.admissible <= table.classified);
    }
}

#[test]
fn narayana_matches_direct_binomials() {
    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for q in 1..=10u64 {
        let mut total = 0;
        for k in 0..q {
            let n = narayana(q as usize, k as usize).unwrap();
            assert_eq!(n * (k + 1), binom(q, k) * binom(q - 1, k));
            total += n;
        }
        // Row sums are Catalan numbers.
        assert_eq!(total, binom(2 * q, q) / (q + 1));
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_equals_series(
        t1 in 1i64..6, d1 in 1i64..5,
        t2 in 0i64..4, d2 in 1i64..5,
        ph in 1i64..5, dph in 1i64..4,
        ps in 1i64..5, dps in 1i64..4,
    ) {
        let theta1 = rational(t1, d1);
        let theta2 = rational(t2, d2);
        prop_assume!(theta2 <= theta1);
        let p = RationalParams::new(theta1, theta2, rational(ph, dph), rational(ps, dps)).unwrap();
        let series = moments_from_equation(&p, 5).unwrap();
        for q in 1..=5 {
            prop_assert_eq!(&moment(q, &p).unwrap(), series.get(q).unwrap());
        }
    }
}
