//! Oriented simplicial complexes and their boundary operators.
//!
//! Every simplex is stored as a strictly increasing tuple of vertex indices,
//! and its orientation is the one induced by that lexicographic order. The
//! boundary of `[v0, ..., vk]` is `sum_i (-1)^i [v0, ..., vi^, ..., vk]`.
//! Simplices of each degree are kept in sorted order, so operator matrices
//! come out identical on every run.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Space};

/// Largest supported complex dimension.
pub const MAX_DIM: usize = 3;

/// A vertex tuple, sorted strictly increasing.
pub type Simplex = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialComplex {
    name: String,
    dim: usize,
    vertices: Vec<[f64; 3]>,
    /// `simplices[k]` lists the k-simplices in sorted order.
    simplices: Vec<Vec<Simplex>>,
}

impl SimplicialComplex {
    /// Builds the complex generated by a list of top-dimensional simplices:
    /// all faces are enumerated, sorted and deduplicated.
    ///
    /// Vertex order inside each input tuple is irrelevant. Repeated top
    /// simplices, repeated vertices inside a tuple and out-of-range indices
    /// are rejected.
    pub fn from_top_simplices(vertices: Vec<[f64; 3]>, tops: &[Vec<usize>]) -> Result<Self> {
        let Some(first) = tops.first() else {
            return Err(Error::InvalidComplex("no top-dimensional simplices".into()));
        };
        if first.is_empty() || first.len() > MAX_DIM + 1 {
            return Err(Error::InvalidComplex(format!(
                "unsupported simplex size {}",
                first.len()
            )));
        }
        let dim = first.len() - 1;
        let mut levels: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); dim + 1];
        for (i, top) in tops.iter().enumerate() {
            if top.len() != dim + 1 {
                return Err(Error::InvalidComplex(format!(
                    "simplex {i} has {} vertices, expected {}",
                    top.len(),
                    dim + 1
                )));
            }
            if let Some(&v) = top.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidComplex(format!(
                    "simplex {i} references vertex {v}, but only {} vertices exist",
                    vertices.len()
                )));
            }
            let mut sorted = top.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!(
                    "simplex {i} repeats a vertex: {top:?}"
                )));
            }
            if !levels[dim].insert(sorted.clone()) {
                return Err(Error::InvalidComplex(format!(
                    "simplex {i} duplicates an earlier simplex {sorted:?}"
                )));
            }
            for k in 0..dim {
                for face in subsets(&sorted, k + 1) {
                    levels[k].insert(face);
                }
            }
        }
        let mut simplices: Vec<Vec<Simplex>> =
            levels.into_iter().map(|s| s.into_iter().collect()).collect();
        // Vertices unused by any top simplex are still 0-simplices of the complex.
        simplices[0] = (0..vertices.len()).map(|v| vec![v]).collect();
        Ok(Self {
            name: "complex".into(),
            dim,
            vertices,
            simplices,
        })
    }

    /// Assembles a complex from explicit per-degree lists without any checks.
    /// Pair with [`validate`](Self::validate) to inspect the result.
    pub fn from_raw(dim: usize, vertices: Vec<[f64; 3]>, simplices: Vec<Vec<Simplex>>) -> Self {
        Self {
            name: "complex".into(),
            dim,
            vertices,
            simplices,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Label used in reports.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.simplices.get(k).map_or(&[], |s| s.as_slice())
    }

    /// Number of k-simplices.
    pub fn count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.dim).map(|k| self.count(k)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts()
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    pub fn space(&self, k: usize) -> Space {
        Space::new(k, self.count(k))
    }

    /// Lists every invariant violation. Empty means the complex is well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dim > MAX_DIM {
            out.push(format!("dimension {} exceeds {MAX_DIM}", self.dim));
        }
        if self.simplices.len() != self.dim + 1 {
            out.push(format!(
                "expected {} simplex levels, found {}",
                self.dim + 1,
                self.simplices.len()
            ));
        }
        let nv = self.vertices.len();
        let mut lookup: Vec<HashMap<&[usize], usize>> = Vec::with_capacity(self.simplices.len());
        for (k, level) in self.simplices.iter().enumerate() {
            let mut seen: HashMap<&[usize], usize> = HashMap::with_capacity(level.len());
            for (i, s) in level.iter().enumerate() {
                if s.len() != k + 1 {
                    out.push(format!("{k}-simplex {i} {s:?} has {} vertices", s.len()));
                }
                if let Some(&v) = s.iter().find(|&&v| v >= nv) {
                    out.push(format!("{k}-simplex {i} {s:?} references missing vertex {v}"));
                }
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    out.push(format!("{k}-simplex {i} {s:?} is not strictly increasing"));
                }
                if let Some(j) = seen.insert(s.as_slice(), i) {
                    out.push(format!("{k}-simplex {i} {s:?} duplicates {k}-simplex {j}"));
                }
            }
            lookup.push(seen);
        }
        for k in 1..self.simplices.len() {
            for (i, s) in self.simplices[k].iter().enumerate() {
                for face in faces(s) {
                    if !lookup[k - 1].contains_key(face.as_slice()) {
                        out.push(format!(
                            "{k}-simplex {i} {s:?} is missing its face {face:?}"
                        ));
                    }
                }
            }
        }
        out
    }

    fn index_of(&self, k: usize) -> HashMap<&[usize], usize> {
        self.simplices(k)
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect()
    }

    /// Boundary operator from k-chains to (k-1)-chains, exact integer entries.
    pub fn boundary_matrix(&self, k: usize) -> Result<LinearOperator<i64>> {
        if k == 0 || k > self.dim {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                lo: 1,
                hi: self.dim,
            });
        }
        let rows = self.index_of(k - 1);
        let mut m = DMatrix::<i64>::zeros(self.count(k - 1), self.count(k));
        for (j, s) in self.simplices[k].iter().enumerate() {
            for (i, face) in faces(s).into_iter().enumerate() {
                let r = *rows.get(face.as_slice()).ok_or_else(|| {
                    Error::InvalidComplex(format!("{k}-simplex {s:?} is missing its face {face:?}"))
                })?;
                m[(r, j)] = if i % 2 == 0 { 1 } else { -1 };
            }
        }
        Ok(LinearOperator::new(self.space(k), self.space(k - 1), m))
    }

    /// Unsigned k-volume of the `i`-th k-simplex in the embedding.
    pub fn volume(&self, k: usize, i: usize) -> f64 {
        let s = &self.simplices[k][i];
        let p = |v: usize| self.vertices[v];
        match k {
            0 => 1.0,
            1 => norm(sub(p(s[1]), p(s[0]))),
            2 => 0.5 * norm(cross(sub(p(s[1]), p(s[0])), sub(p(s[2]), p(s[0])))),
            _ => {
                let a = sub(p(s[1]), p(s[0]));
                let b = sub(p(s[2]), p(s[0]));
                let c = sub(p(s[3]), p(s[0]));
                dot(a, cross(b, c)).abs() / 6.0
            }
        }
    }

    pub fn barycenter(&self, k: usize, i: usize) -> [f64; 3] {
        let s = &self.simplices[k][i];
        let mut c = [0.0; 3];
        for &v in s {
            for (ci, xi) in c.iter_mut().zip(self.vertices[v]) {
                *ci += xi;
            }
        }
        c.map(|x| x / s.len() as f64)
    }

    /// For every k-simplex, the (k+1)-simplices it bounds.
    pub fn cofaces(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count(k)];
        if k >= self.dim {
            return out;
        }
        let index = self.index_of(k);
        for (j, s) in self.simplices[k + 1].iter().enumerate() {
            for face in faces(s) {
                if let Some(&i) = index.get(face.as_slice()) {
                    out[i].push(j);
                }
            }
        }
        out
    }

    /// Betti numbers over the rationals, from ranks of the boundary
    /// matrices: `b_k = n_k − rank ∂_k − rank ∂_{k+1}`.
    pub fn betti_numbers(&self) -> Result<Vec<usize>> {
        let mut ranks = vec![0usize; self.dim + 2];
        for k in 1..=self.dim {
            ranks[k] = rank_mod_p(self.boundary_matrix(k)?.matrix());
        }
        Ok((0..=self.dim)
            .map(|k| self.count(k) - ranks[k] - ranks[k + 1])
            .collect())
    }

    /// Writes the 2-simplices as ASCII OFF.
    pub fn to_off(&self) -> String {
        use fmt::Write;
        let tris = self.simplices(2);
        let mut s = String::new();
        let _ = writeln!(s, "OFF");
        let _ = writeln!(s, "{} {} 0", self.vertices.len(), tris.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
        }
        for t in tris {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

impl fmt::Display for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}-complex, counts {:?})", self.name, self.dim, self.counts())
    }
}

/// Rank over GF(p), p = 2^31 − 1. Equals the rational rank for the
/// torsion-free complexes handled here.
fn rank_mod_p(m: &DMatrix<i64>) -> usize {
    const P: i64 = 2_147_483_647;
    let inv = |a: i64| {
        let (mut base, mut e, mut acc) = (a.rem_euclid(P), P - 2, 1i64);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % P;
            }
            base = base * base % P;
            e >>= 1;
        }
        acc
    };
    let (rows, cols) = m.shape();
    let mut a: Vec<Vec<i64>> = (0..rows)
        .map(|i| (0..cols).map(|j| m[(i, j)].rem_euclid(P)).collect())
        .collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        let pinv = inv(a[rank][c]);
        for i in rank + 1..rows {
            if a[i][c] != 0 {
                let f = a[i][c] * pinv % P;
                for j in c..cols {
                    a[i][j] = (a[i][j] - f * a[rank][j]).rem_euclid(P);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// The codimension-one faces of `s`, in boundary order (vertex `i` removed).
pub(crate) fn faces(s: &[usize]) -> Vec<Simplex> {
    (0..s.len())
        .map(|skip| {
            s.iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

fn subsets(s: &[usize], size: usize) -> Vec<Simplex> {
    fn rec(s: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Simplex>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..s.len() {
            cur.push(s[i]);
            rec(s, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(s, size, 0, &mut Vec::with_capacity(size), &mut out);
    out
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
