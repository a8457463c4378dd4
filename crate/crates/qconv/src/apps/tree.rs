//! Weighted, coloured decision trees and their compilation to converting
//! vector sets.

use serde::{Deserialize, Serialize};

use super::advice::SearchMode;
use crate::convert::{ConvertingVectorSet, CvsParts, Readout, SparseVector, Verifier};
use crate::error::{Error, Result};
use crate::numerics::{basis_vector, c64, C64};
use crate::spanprog::format_input;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    Red,
}

impl Color {
    fn index(self) -> usize {
        match self {
            Color::Black => 0,
            Color::Red => 1,
        }
    }
}

/// A vertex queries an index (internal) or carries an output label (leaf).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeVertex {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub from: usize,
    pub to: usize,
    /// Letters of the queried index that select this edge.
    pub letters: Vec<u8>,
    pub color: Color,
    pub weight: f64,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    n: usize,
    q: usize,
    m: usize,
    vertices: Vec<TreeVertex>,
    edges: Vec<TreeEdge>,
}

/// Rooted decision tree; vertex 0 is the root.
#[derive(Clone, Debug)]
pub struct DecisionTree {
    n: usize,
    q: usize,
    m: usize,
    vertices: Vec<TreeVertex>,
    edges: Vec<TreeEdge>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
}

impl DecisionTree {
    /// Validates the structure: a tree rooted at 0, letter partitions, one
    /// black edge per internal vertex, shared weights per colour, and no
    /// index queried twice on a root-leaf path.
    pub fn new(n: usize, q: usize, m: usize, vertices: Vec<TreeVertex>, edges: Vec<TreeEdge>) -> Result<Self> {
        let nv = vertices.len();
        if nv == 0 {
            return Err(Error::Validation("tree has no vertices".into()));
        }
        let mut children = vec![Vec::new(); nv];
        let mut parent = vec![None; nv];
        for (k, e) in edges.iter().enumerate() {
            if e.from >= nv || e.to >= nv {
                return Err(Error::Validation(format!("edge {k} references a missing vertex")));
            }
            if e.to == 0 || parent[e.to].replace(k).is_some() {
                return Err(Error::Validation(format!("vertex {} has more than one parent", e.to)));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::Validation(format!("edge {k} has non-positive weight {}", e.weight)));
            }
            children[e.from].push(k);
        }
        for (v, vert) in vertices.iter().enumerate() {
            match (vert.query, vert.label) {
                (Some(j), None) => {
                    if j >= n {
                        return Err(Error::Validation(format!("vertex {v} queries index {j} >= {n}")));
                    }
                    let mut seen = vec![false; q];
                    let (mut black, mut red_w, mut black_w) = (0, None, None);
                    for &k in &children[v] {
                        let e = &edges[k];
                        for &a in &e.letters {
                            if a as usize >= q || std::mem::replace(&mut seen[a as usize], true) {
                                return Err(Error::Validation(format!("letters leaving vertex {v} do not partition [q]")));
                            }
                        }
                        let slot = match e.color {
                            Color::Black => {
                                black += 1;
                                &mut black_w
                            }
                            Color::Red => &mut red_w,
                        };
                        if let Some(w) = *slot {
                            if w != e.weight {
                                return Err(Error::Validation(format!("{:?} edges leaving vertex {v} differ in weight", e.color)));
                            }
                        }
                        *slot = Some(e.weight);
                    }
                    if seen.iter().any(|s| !s) {
                        return Err(Error::Validation(format!("letters leaving vertex {v} do not cover [q]")));
                    }
                    if black != 1 {
                        return Err(Error::Validation(format!("vertex {v} has {black} black edges")));
                    }
                }
                (None, Some(l)) => {
                    if l >= m {
                        return Err(Error::Validation(format!("leaf {v} has label {l} >= {m}")));
                    }
                    if !children[v].is_empty() {
                        return Err(Error::Validation(format!("leaf {v} has outgoing edges")));
                    }
                }
                _ => return Err(Error::Validation(format!("vertex {v} must have exactly one of query and label"))),
            }
        }
        // Depths and the repeated-query check, walking down from the root.
        let mut depth = vec![usize::MAX; nv];
        depth[0] = 0;
        let mut stack = vec![(0usize, Vec::<usize>::new())];
        let mut reached = 0;
        while let Some((v, mut asked)) = stack.pop() {
            reached += 1;
            if let Some(j) = vertices[v].query {
                if asked.contains(&j) {
                    return Err(Error::Validation(format!("index {j} is queried twice on a path through vertex {v}")));
                }
                asked.push(j);
            }
            for &k in &children[v] {
                let u = edges[k].to;
                depth[u] = depth[v] + 1;
                stack.push((u, asked.clone()));
            }
        }
        if reached != nv {
            return Err(Error::Validation("tree is not connected to the root".into()));
        }
        Ok(DecisionTree { n, q, m, vertices, edges, children, depth })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> usize {
        self.q
    }
    /// Number of output labels.
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn vertices(&self) -> &[TreeVertex] {
        &self.vertices
    }
    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    fn check_input(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n || x.iter().any(|&c| c as usize >= self.q) {
            return Err(Error::Validation(format!("input {} is not in [{}]^{}", format_input(x), self.q, self.n)));
        }
        Ok(())
    }

    /// Edge indices followed on input `x`.
    pub fn path(&self, x: &[u8]) -> Result<Vec<usize>> {
        self.check_input(x)?;
        let mut v = 0;
        let mut out = Vec::new();
        while let Some(j) = self.vertices[v].query {
            let k = *self.children[v]
                .iter()
                .find(|&&k| self.edges[k].letters.contains(&x[j]))
                .expect("validated partition");
            out.push(k);
            v = self.edges[k].to;
        }
        Ok(out)
    }

    pub fn evaluate(&self, x: &[u8]) -> Result<usize> {
        let path = self.path(x)?;
        let leaf = path.last().map_or(0, |&k| self.edges[k].to);
        Ok(self.vertices[leaf].label.expect("leaf"))
    }

    fn color_weight(&self, v: usize, color: Color) -> Option<f64> {
        self.children[v].iter().map(|&k| &self.edges[k]).find(|e| e.color == color).map(|e| e.weight)
    }

    /// Weight of the red edges leaving `v`; `None` stands for infinity.
    pub fn red_weight(&self, v: usize) -> Option<f64> {
        self.color_weight(v, Color::Red)
    }

    pub fn black_weight(&self, v: usize) -> Option<f64> {
        self.color_weight(v, Color::Black)
    }

    /// Largest number of red edges on a root-leaf path.
    pub fn max_red(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((v, reds)) = stack.pop() {
            best = best.max(reds);
            for &k in &self.children[v] {
                let e = &self.edges[k];
                stack.push((e.to, reds + (e.color == Color::Red) as usize));
            }
        }
        best
    }

    /// Black edges weigh `G = max_red()`, red edges weigh their depth
    /// counted in edges from the root.
    pub fn theorem46_weights(&self) -> Result<Self> {
        let g = self.max_red().max(1) as f64;
        let mut edges = self.edges.clone();
        for e in edges.iter_mut() {
            e.weight = match e.color {
                Color::Black => g,
                Color::Red => self.depth[e.to] as f64,
            };
        }
        DecisionTree::new(self.n, self.q, self.m, self.vertices.clone(), edges)
    }

    /// Upper bounds on `(w₊, w₋)` for input `x` from the tree weights.
    pub fn witness_bounds(&self, x: &[u8]) -> Result<(f64, f64)> {
        let (mut plus, mut minus) = (0.0, 0.0);
        for k in self.path(x)? {
            let e = &self.edges[k];
            plus += 4.0 * e.weight;
            minus += self.red_weight(e.from).map_or(0.0, |r| 4.0 / r);
            if e.color == Color::Red {
                minus += 4.0 / self.black_weight(e.from).expect("validated");
            }
        }
        Ok((plus, minus))
    }

    pub fn to_json(&self) -> String {
        let file = TreeFile { n: self.n, q: self.q, m: self.m, vertices: self.vertices.clone(), edges: self.edges.clone() };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: TreeFile = serde_json::from_str(text)?;
        DecisionTree::new(f.n, f.q, f.m, f.vertices, f.edges)
    }
}

/// Readout for compiled trees: state 0 is the start state and state
/// `l + 1` is label `l`.
pub fn tree_readout(m: usize) -> Readout {
    Readout::new(std::iter::once(None).chain((0..m).map(Some)).collect())
}

/// Compiles `tree` into a converting vector set from `|0>` to `|f(x) + 1>`
/// on `domain`, whose labels must agree with the tree.
///
/// The ambient space is `C^{|V|} ⊗ C² ⊗ C^{|V|+1} ⊗ C^{m+1}`; the last two
/// factors carry `μ̃_i = e_0 + e_{i+1}` and `ν̃_i = e_0 - e_{i+1}`.
pub fn tree_to_cvs(tree: &DecisionTree, domain: &[Vec<u8>], labels: &[usize]) -> Result<ConvertingVectorSet> {
    if domain.len() != labels.len() {
        return Err(Error::Validation("domain and labels differ in length".into()));
    }
    let nv = tree.n_vertices();
    let m = tree.m;
    let dim = nv * 2 * (nv + 1) * (m + 1);
    let index = |v: usize, c: Color, a: usize, b: usize| ((v * 2 + c.index()) * (nv + 1) + a) * (m + 1) + b;
    let mut parts = CvsParts {
        n: tree.n,
        q: tree.q,
        dim,
        domain: domain.to_vec(),
        v: vec![],
        u: vec![],
        rho: vec![],
        sigma: vec![],
    };
    for (x, &label) in domain.iter().zip(labels) {
        let got = tree.evaluate(x)?;
        if got != label {
            return Err(Error::Validation(format!("tree outputs {got} on {} but the label is {label}", format_input(x))));
        }
        let mut vs = vec![SparseVector::zero(dim); tree.n];
        let mut us = vec![SparseVector::zero(dim); tree.n];
        for k in tree.path(x)? {
            let e = &tree.edges[k];
            let j = tree.vertices[e.from].query.expect("internal");
            // Tensor with μ̃_u ⊗ μ̃_f (signs +) or ν̃_u ⊗ ν̃_f (signs ±).
            let tensor = |color: Color, coeff: f64, nu: bool| -> Vec<(usize, C64)> {
                let mut out = Vec::with_capacity(4);
                for (a, sa) in [(0, 1.0), (e.to + 1, if nu { -1.0 } else { 1.0 })] {
                    for (b, sb) in [(0, 1.0), (label + 1, if nu { -1.0 } else { 1.0 })] {
                        out.push((index(e.from, color, a, b), c64(coeff * sa * sb, 0.0)));
                    }
                }
                out
            };
            vs[j] = SparseVector::new(dim, tensor(e.color, e.weight.sqrt(), false))?;
            let mut entries = Vec::new();
            if let Some(r) = tree.red_weight(e.from) {
                entries.extend(tensor(Color::Red, 1.0 / r.sqrt(), true));
            }
            if e.color == Color::Red {
                let b = tree.black_weight(e.from).expect("validated");
                entries.extend(tensor(Color::Black, 1.0 / b.sqrt(), true));
            }
            us[j] = SparseVector::new(dim, entries)?;
        }
        parts.v.push(vs);
        parts.u.push(us);
        parts.rho.push(basis_vector(m + 1, 0));
        parts.sigma.push(basis_vector(m + 1, label + 1));
    }
    ConvertingVectorSet::new(parts)
}

/// In-order search tree with its label table.
#[derive(Clone, Debug)]
pub struct SearchTree {
    pub tree: DecisionTree,
    pub mode: SearchMode,
    /// 1-based positions reported by each label; empty for leaves that no
    /// admissible input reaches.
    pub outputs: Vec<Vec<usize>>,
}

impl SearchTree {
    /// Admissible inputs: weight exactly 2 (find-both) or 1 to 2
    /// (find-first), with their labels.
    pub fn domain(&self) -> Result<(Vec<Vec<u8>>, Vec<usize>)> {
        let n = self.tree.n;
        let mut xs = Vec::new();
        for a in 1..=n {
            if self.mode == SearchMode::FindFirst {
                let mut x = vec![0u8; n];
                x[a - 1] = 1;
                xs.push(x);
            }
            for b in a + 1..=n {
                let mut x = vec![0u8; n];
                x[a - 1] = 1;
                x[b - 1] = 1;
                xs.push(x);
            }
        }
        let labels = xs.iter().map(|x| self.tree.evaluate(x)).collect::<Result<Vec<_>>>()?;
        Ok((xs, labels))
    }

    /// Converting vector set over [`Self::domain`].
    pub fn compile(&self) -> Result<ConvertingVectorSet> {
        let (xs, labels) = self.domain()?;
        tree_to_cvs(&self.tree, &xs, &labels)
    }

    pub fn label_of(&self, positions: &[usize]) -> Option<usize> {
        self.outputs.iter().position(|o| o == positions)
    }
}

/// Queries bits in order; an edge is red exactly when reading a 1 follows
/// it. Red edges weigh their depth and black edges weigh `G` (2 for
/// find-both, 1 for find-first).
///
/// Find-both queries positions `1..n-1` until the first one is found and
/// then every later position until the second. Find-first queries
/// positions `1..n-1`; reading zeros throughout means the one is at `n`.
pub fn build_search_tree(n: usize, mode: SearchMode) -> Result<SearchTree> {
    if n < 2 {
        return Err(Error::Validation(format!("search trees need n >= 2, got {n}")));
    }
    let mut b = Builder::default();
    let root = b.vertex(Some(0), None);
    let mut cur = root;
    for p in 1..n {
        // `cur` queries position p (index p - 1) with no one found yet.
        let on_one = match mode {
            SearchMode::FindFirst => b.leaf(vec![p]),
            SearchMode::FindBoth => {
                let mut w = b.vertex(Some(p), None);
                let first = w;
                for p2 in p + 1..=n {
                    let hit = b.leaf(vec![p, p2]);
                    b.edge(w, hit, 1, Color::Red);
                    let next = if p2 < n { b.vertex(Some(p2), None) } else { b.leaf(vec![]) };
                    b.edge(w, next, 0, Color::Black);
                    w = next;
                }
                first
            }
        };
        b.edge(cur, on_one, 1, Color::Red);
        let next = if p + 1 < n {
            b.vertex(Some(p), None)
        } else {
            match mode {
                SearchMode::FindFirst => b.leaf(vec![n]),
                SearchMode::FindBoth => b.leaf(vec![]),
            }
        };
        b.edge(cur, next, 0, Color::Black);
        cur = next;
    }
    let m = b.outputs.len();
    let tree = DecisionTree::new(n, 2, m, b.vertices, b.edges)?.theorem46_weights()?;
    Ok(SearchTree { tree, mode, outputs: b.outputs })
}

#[derive(Default)]
struct Builder {
    vertices: Vec<TreeVertex>,
    edges: Vec<TreeEdge>,
    outputs: Vec<Vec<usize>>,
}

impl Builder {
    fn vertex(&mut self, query: Option<usize>, label: Option<usize>) -> usize {
        self.vertices.push(TreeVertex { query, label });
        self.vertices.len() - 1
    }

    fn leaf(&mut self, positions: Vec<usize>) -> usize {
        let label = match self.outputs.iter().position(|o| *o == positions) {
            Some(l) => l,
            None => {
                self.outputs.push(positions);
                self.outputs.len() - 1
            }
        };
        self.vertex(None, Some(label))
    }

    fn edge(&mut self, from: usize, to: usize, letter: u8, color: Color) {
        self.edges.push(TreeEdge { from, to, letters: vec![letter], color, weight: 1.0 });
    }
}

/// Checks that every reported position holds a 1; two queries for
/// find-both outputs.
#[derive(Clone, Debug)]
pub struct PositionVerifier {
    outputs: Vec<Vec<usize>>,
}

impl PositionVerifier {
    pub fn new(search: &SearchTree) -> Self {
        PositionVerifier { outputs: search.outputs.clone() }
    }
}

impl Verifier for PositionVerifier {
    fn check(&self, x: &[u8], guess: usize) -> bool {
        match self.outputs.get(guess) {
            Some(pos) if !pos.is_empty() => pos.iter().all(|&p| x.get(p - 1) == Some(&1)),
            _ => false,
        }
    }
}

/// In-order tree for OR on `n` bits: a 1 ends the search (red edge, label
/// 1); reading only zeros ends at label 0.
pub fn build_or_tree(n: usize) -> Result<DecisionTree> {
    if n < 1 {
        return Err(Error::Validation("OR tree needs n >= 1".into()));
    }
    let mut b = Builder::default();
    let (zero, one) = (0, 1);
    b.outputs = vec![vec![], vec![]];
    let mut cur = b.vertex(Some(0), None);
    for p in 1..=n {
        let hit = b.vertex(None, Some(one));
        b.edge(cur, hit, 1, Color::Red);
        let next = if p < n { b.vertex(Some(p), None) } else { b.vertex(None, Some(zero)) };
        b.edge(cur, next, 0, Color::Black);
        cur = next;
    }
    DecisionTree::new(n, 2, 2, b.vertices, b.edges)?.theorem46_weights()
}
