//! Connected components of the proximity graph at one instant.

/// Symmetric adjacency over agent indices; entries for absent agents stay false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    bits: Vec<bool>,
}

impl Adjacency {
    pub fn new(n: usize) -> Self {
        Adjacency {
            n,
            bits: vec![false; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        self.bits[i * self.n + j] = on;
        self.bits[j * self.n + i] = on;
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    /// Pairs `(i, j)`, `i < j`, adjacent here but not in `before`.
    pub fn new_edges(&self, before: &Adjacency) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j) && !before.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Components of `adj` that contain at least one of `new_edges`.
///
/// Each group is sorted; groups come in ascending order of their smallest
/// member.
pub fn form_ga_groups(adj: &Adjacency, new_edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = components.len();
        comp[s] = id;
        let mut members = vec![s];
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            for (v, c) in comp.iter_mut().enumerate() {
                if *c == usize::MAX && adj.get(u, v) {
                    *c = id;
                    members.push(v);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        components.push(members);
    }
    let mut hit = vec![false; components.len()];
    for &(i, _) in new_edges {
        hit[comp[i]] = true;
    }
    let mut groups: Vec<Vec<usize>> = components
        .into_iter()
        .zip(hit)
        .filter_map(|(c, h)| h.then_some(c))
        .collect();
    groups.sort_by_key(|g| g[0]);
    groups
}
