//! Structure of a table's support viewed as a bipartite graph: rows and
//! columns are vertices, positive cells are edges.
//!
//! A transportation-polytope vertex has an acyclic support. A table is the
//! NW corner table of its (permuted) marginals exactly when its support can
//! be laid out as a staircase, i.e. some row and column order makes the
//! support monotone: no two cells `(i, j)`, `(i', j')` with `i < i'` and
//! `j > j'`. For a forest this holds iff every component is a caterpillar
//! (removing the leaves leaves a path).

use crate::table::CouplingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    Row(usize),
    Col(usize),
}

struct Graph {
    rows: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn of(cells: &[(usize, usize)], rows: usize, cols: usize) -> Self {
        let mut adj = vec![Vec::new(); rows + cols];
        for &(r, s) in cells {
            adj[r].push(rows + s);
            adj[rows + s].push(r);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Self { rows, adj }
    }

    fn node(&self, v: usize) -> Node {
        if v < self.rows {
            Node::Row(v)
        } else {
            Node::Col(v - self.rows)
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.0[v] != v {
            self.0[v] = self.0[self.0[v]];
            v = self.0[v];
        }
        v
    }

    /// False when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// True when the cells, read as bipartite edges, contain no cycle.
pub fn cells_form_forest(cells: &[(usize, usize)], rows: usize, cols: usize) -> bool {
    let mut uf = UnionFind::new(rows + cols);
    cells.iter().all(|&(r, s)| uf.union(r, rows + s))
}

pub fn is_forest(t: &CouplingTable) -> bool {
    cells_form_forest(&t.support(), t.rows(), t.cols())
}

/// True when no two support cells form a "south-west" pair.
pub fn is_monotone(t: &CouplingTable) -> bool {
    let support = t.support();
    // Row-major order: within each row columns increase, so it suffices that
    // each row starts no earlier than the previous row ended.
    let mut last_col = 0;
    let mut row_first: Option<(usize, usize)> = None;
    for &(r, s) in &support {
        match row_first {
            Some((pr, _)) if pr == r => {}
            _ => {
                if s < last_col {
                    return false;
                }
                row_first = Some((r, s));
            }
        }
        last_col = s;
    }
    true
}

/// Row and column orders under which the support is monotone, if any.
///
/// Zero lines are appended at the end. Returns `None` when the support has
/// a cycle or a component that is not a caterpillar.
pub fn staircase_order(t: &CouplingTable) -> Option<(Vec<usize>, Vec<usize>)> {
    let (rows, cols) = (t.rows(), t.cols());
    let support = t.support();
    if !cells_form_forest(&support, rows, cols) {
        return None;
    }
    let g = Graph::of(&support, rows, cols);
    let total = rows + cols;
    let mut visited = vec![false; total];
    let mut row_order = Vec::with_capacity(rows);
    let mut col_order = Vec::with_capacity(cols);

    for start in 0..total {
        if visited[start] || g.adj[start].is_empty() {
            continue;
        }
        let component = collect_component(&g, start, &mut visited);
        let path = caterpillar_walk(&g, &component)?;
        let mut placed = vec![false; total];
        let mut push = |v: usize, placed: &mut Vec<bool>| {
            if !placed[v] {
                placed[v] = true;
                match g.node(v) {
                    Node::Row(r) => row_order.push(r),
                    Node::Col(s) => col_order.push(s),
                }
            }
        };
        let on_path: Vec<bool> = {
            let mut p = vec![false; total];
            for &v in &path {
                p[v] = true;
            }
            p
        };
        for &v in &path {
            push(v, &mut placed);
            for &w in &g.adj[v] {
                if !on_path[w] {
                    push(w, &mut placed);
                }
            }
        }
    }
    for v in 0..total {
        if g.adj[v].is_empty() {
            match g.node(v) {
                Node::Row(r) => row_order.push(r),
                Node::Col(s) => col_order.push(s),
            }
        }
    }
    Some((row_order, col_order))
}

fn collect_component(g: &Graph, start: usize, visited: &mut [bool]) -> Vec<usize> {
    let mut stack = vec![start];
    let mut out = Vec::new();
    visited[start] = true;
    while let Some(v) = stack.pop() {
        out.push(v);
        for &w in &g.adj[v] {
            if !visited[w] {
                visited[w] = true;
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}

/// The spine of a caterpillar tree extended by one leaf at each end, in
/// walking order. `None` if the tree is not a caterpillar.
fn caterpillar_walk(g: &Graph, component: &[usize]) -> Option<Vec<usize>> {
    if component.len() <= 2 {
        return Some(component.to_vec());
    }
    let is_leaf = |v: usize| g.adj[v].len() == 1;
    let spine: Vec<usize> = component.iter().copied().filter(|&v| !is_leaf(v)).collect();
    let spine_degree = |v: usize| g.adj[v].iter().filter(|&&w| !is_leaf(w)).count();
    if spine.iter().any(|&v| spine_degree(v) > 2) {
        return None;
    }
    let first = spine.iter().copied().find(|&v| spine_degree(v) <= 1)?;
    let mut path = Vec::with_capacity(spine.len() + 2);
    if let Some(&leaf) = g.adj[first].iter().find(|&&w| is_leaf(w)) {
        path.push(leaf);
    }
    let mut prev = usize::MAX;
    let mut cur = first;
    loop {
        path.push(cur);
        let next = g.adj[cur].iter().copied().find(|&w| w != prev && !is_leaf(w));
        match next {
            Some(n) => {
                prev = cur;
                cur = n;
            }
            None => break,
        }
    }
    let last = *path.last().expect("spine is non-empty");
    let head = path.first().copied();
    if let Some(&leaf) = g.adj[last].iter().find(|&&w| is_leaf(w) && Some(w) != head) {
        path.push(leaf);
    }
    Some(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frechet::cograduation_table;
    use crate::marginal::MarginalDistribution;
    use crate::table::Provenance;

    fn m(p: &[f64]) -> MarginalDistribution {
        MarginalDistribution::new(p.to_vec()).unwrap()
    }

    fn table(cells: Vec<Vec<f64>>) -> CouplingTable {
        let rows: Vec<f64> = cells.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..cells[0].len()).map(|s| cells.iter().map(|r| r[s]).sum()).collect();
        CouplingTable::new(cells, m(&rows), m(&cols), Provenance::Explicit).unwrap()
    }

    #[test]
    fn forest_detection() {
        assert!(cells_form_forest(&[(0, 0), (0, 1), (1, 1)], 2, 2));
        assert!(!cells_form_forest(&[(0, 0), (0, 1), (1, 0), (1, 1)], 2, 2));
    }

    #[test]
    fn nw_table_is_monotone() {
        let t = cograduation_table(&m(&[0.1, 0.2, 0.3, 0.4]), &m(&[0.25, 0.25, 0.5]));
        assert!(is_monotone(&t));
        let (ro, co) = staircase_order(&t).unwrap();
        assert!(is_monotone(&t.permuted(&ro, &co).unwrap()));
    }

    #[test]
    fn staircase_found_for_shuffled_path() {
        // Support (0,0),(0,2),(1,1),(1,2): monotone under columns 0,2,1.
        let t = table(vec![vec![0.4, 0.0, 0.1], vec![0.0, 0.35, 0.15]]);
        assert!(!is_monotone(&t));
        let (ro, co) = staircase_order(&t).unwrap();
        let p = t.permuted(&ro, &co).unwrap();
        assert!(is_monotone(&p), "{ro:?} {co:?} {:?}", p.to_nested());
    }

    #[test]
    fn star_of_non_leaves_has_no_staircase() {
        // Column 0 joins rows 0, 1, 2, each of which also owns another column.
        let t = table(vec![
            vec![0.1, 0.2, 0.0, 0.0],
            vec![0.1, 0.0, 0.2, 0.0],
            vec![0.1, 0.0, 0.0, 0.3],
        ]);
        assert!(is_forest(&t));
        assert!(staircase_order(&t).is_none());
    }

    #[test]
    fn zero_lines_go_last() {
        let t = table(vec![vec![0.0, 0.0], vec![0.0, 1.0]]);
        let (ro, co) = staircase_order(&t).unwrap();
        assert_eq!(ro, vec![1, 0]);
        assert_eq!(co, vec![1, 0]);
    }
}
