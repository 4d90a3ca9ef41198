//! Set partitions of `{0, .., n-1}` as restricted growth strings.

/// Block label per element; labels are assigned in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    labels: Vec<u8>,
    blocks: u8,
}

impl SetPartition {
    /// Builds from arbitrary labels, renumbering them into growth-string form.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: Vec<(usize, u8)> = Vec::new();
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            let id = match map.iter().find(|(k, _)| *k == l) {
                Some(&(_, id)) => id,
                None => {
                    let id = map.len() as u8;
                    map.push((l, id));
                    id
                }
            };
            out.push(id);
        }
        SetPartition {
            blocks: map.len() as u8,
            labels: out,
        }
    }

    /// All elements in separate blocks.
    pub fn discrete(n: usize) -> Self {
        SetPartition {
            labels: (0..n as u8).collect(),
            blocks: n as u8,
        }
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn block_count(&self) -> usize {
        self.blocks as usize
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Every set partition of an `n`-element set, in lexicographic growth-string order.
pub fn all_partitions(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(SetPartition {
            labels: Vec::new(),
            blocks: 0,
        });
        return out;
    }
    let mut a = vec![0u8; n];
    // max label among a[0..=i]
    let mut maxes = vec![0u8; n];
    loop {
        out.push(SetPartition {
            labels: a.clone(),
            blocks: maxes[n - 1] + 1,
        });
        // Increment the rightmost position that can grow.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            if a[i] <= maxes[i - 1] {
                a[i] += 1;
                maxes[i] = maxes[i - 1].max(a[i]);
                for j in i + 1..n {
                    a[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Bell numbers `B(n)`, exact for `n <= 25`.
pub fn bell(n: usize) -> u64 {
    // Bell triangle
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}
