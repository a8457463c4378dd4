use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{c64, CMatrix, CVector, SubspaceBasis};
use crate::spanprog::{SpanProgram, SpanProgramParts};

/// Candidate edge set of an st-connectivity instance. Each input bit says
/// whether the corresponding edge is present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    s: usize,
    t: usize,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>, s: usize, t: usize) -> Result<Self> {
        if s >= n_vertices || t >= n_vertices {
            return Err(Error::Validation(format!("terminal outside 0..{n_vertices}")));
        }
        if s == t {
            return Err(Error::Validation("s and t must differ".into()));
        }
        for &(u, v) in &edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::Validation(format!("edge ({u},{v}) outside 0..{n_vertices}")));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop at vertex {u}")));
            }
        }
        Ok(Graph { n_vertices, edges, s, t })
    }

    /// Parses the edge-list format: a header `n s t`, then one `u v` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let nums = parse_numbers(header)?;
        if nums.len() != 3 {
            return Err(Error::Parse(format!("header must be `n s t`, got {header:?}")));
        }
        let mut edges = Vec::new();
        for line in lines {
            let e = parse_numbers(line)?;
            if e.len() != 2 {
                return Err(Error::Parse(format!("edge line must be `u v`, got {line:?}")));
            }
            edges.push((e[0], e[1]));
        }
        Graph::new(nums[0], edges, nums[1], nums[2])
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn t(&self) -> usize {
        self.t
    }

    /// Whether `s` and `t` are joined by present edges.
    pub fn connected(&self, present: &[u8]) -> bool {
        let mut parent: Vec<usize> = (0..self.n_vertices).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            if present[k] == 1 {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                parent[a] = b;
            }
        }
        find(&mut parent, self.s) == find(&mut parent, self.t)
    }

    /// `R_{s,t}` of the present-edge subgraph with unit resistances, or
    /// `None` when `s` and `t` are disconnected. Solves the Laplacian of the
    /// component of `s` grounded at `t`, which is positive definite.
    pub fn effective_resistance(&self, present: &[u8]) -> Option<f64> {
        if !self.connected(present) {
            return None;
        }
        let live: Vec<(usize, usize)> =
            self.edges.iter().zip(present).filter(|(_, &b)| b == 1).map(|(&e, _)| e).collect();
        let mut component = vec![self.s];
        let mut next = 0;
        while next < component.len() {
            let u = component[next];
            next += 1;
            for &(a, b) in &live {
                let w = if a == u { b } else if b == u { a } else { continue };
                if !component.contains(&w) {
                    component.push(w);
                }
            }
        }
        let free: Vec<usize> = component.into_iter().filter(|&v| v != self.t).collect();
        let slot = |v: usize| free.iter().position(|&f| f == v);
        let mut lap = DMatrix::<f64>::zeros(free.len(), free.len());
        for &(u, v) in &live {
            let (su, sv) = (slot(u), slot(v));
            for (a, b) in [(su, sv), (sv, su)] {
                if let Some(a) = a {
                    lap[(a, a)] += 1.0;
                    if let Some(b) = b {
                        lap[(a, b)] -= 1.0;
                    }
                }
            }
        }
        let s = slot(self.s).expect("s is free");
        let mut rhs = DVector::<f64>::zeros(free.len());
        rhs[s] = 1.0;
        Some(lap.cholesky()?.solve(&rhs)[s])
    }
}

fn parse_numbers(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|w| w.parse::<usize>().map_err(|e| Error::Parse(format!("{w:?}: {e}"))))
        .collect()
}

/// Signed-incidence span program: one coordinate per edge, available when
/// the edge is present; `A` maps edge `(u, v)` to `e_u - e_v`, `τ = e_s - e_t`.
pub fn build_st_connectivity(g: &Graph) -> Result<SpanProgram> {
    let m = g.n_edges();
    if m == 0 {
        return Err(Error::Validation("graph has no candidate edges".into()));
    }
    let mut a = CMatrix::zeros(g.n_vertices, m);
    for (k, &(u, v)) in g.edges.iter().enumerate() {
        a[(u, k)] = c64(1.0, 0.0);
        a[(v, k)] = c64(-1.0, 0.0);
    }
    let mut tau = CVector::zeros(g.n_vertices);
    tau[g.s] = c64(1.0, 0.0);
    tau[g.t] = c64(-1.0, 0.0);
    let mut index_blocks = Vec::with_capacity(m);
    let mut letters = Vec::with_capacity(m);
    for k in 0..m {
        let coord = SubspaceBasis::coordinates(m, &[k])?;
        index_blocks.push(coord.clone());
        letters.push(vec![SubspaceBasis::empty(m), coord]);
    }
    SpanProgram::new(SpanProgramParts {
        n: m,
        q: 2,
        index_blocks,
        letters,
        h_true: SubspaceBasis::empty(m),
        h_false: SubspaceBasis::empty(m),
        a,
        tau,
    })
}

/// The 4-cycle `s - a - t - b - s`: inputs range over single paths, both
/// paths and every cut.
pub fn four_cycle() -> Graph {
    Graph::new(4, vec![(0, 1), (1, 3), (0, 2), (2, 3)], 0, 3).expect("valid graph")
}
