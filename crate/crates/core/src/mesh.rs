//! Built-in meshes and ASCII OFF input.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};

/// Names accepted by [`builtin`].
pub const BUILTINS: &[&str] = &[
    "triangle", "tetra", "ico1", "ico2", "ico3", "torus4", "torus6", "torus8", "torus12",
];

/// Looks up a generator by name, e.g. `"ico2"` or `"torus8"`.
pub fn builtin(name: &str) -> Result<SimplicialComplex> {
    match name {
        "triangle" => Ok(filled_triangle().with_name(name)),
        "tetra" => Ok(tetra_sphere().with_name(name)),
        _ => {
            if let Some(level) = name.strip_prefix("ico").and_then(|s| s.parse().ok()) {
                if BUILTINS.contains(&name) {
                    return Ok(icosphere(level)?.with_name(name));
                }
            }
            if let Some(n) = name.strip_prefix("torus").and_then(|s| s.parse().ok()) {
                if BUILTINS.contains(&name) {
                    return Ok(grid_torus(n)?.with_name(name));
                }
            }
            Err(Error::InvalidParameter {
                name: "mesh",
                msg: format!(
                    "unknown builtin {name:?}; available: {}",
                    BUILTINS.join(", ")
                ),
            })
        }
    }
}

pub fn single_point() -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(vec![[0.0; 3]], &[vec![0]])
        .unwrap()
        .with_name("point")
}

pub fn single_edge() -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(vec![[0.0; 3], [1.0, 0.0, 0.0]], &[vec![0, 1]])
        .unwrap()
        .with_name("edge")
}

/// One filled triangle of unit area.
pub fn filled_triangle() -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(
        vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        &[vec![0, 1, 2]],
    )
    .unwrap()
    .with_name("triangle")
}

/// A single solid tetrahedron (3-complex).
pub fn solid_tetrahedron() -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(tetra_vertices().to_vec(), &[vec![0, 1, 2, 3]])
        .unwrap()
        .with_name("solid-tetra")
}

fn tetra_vertices() -> [[f64; 3]; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// Boundary of a regular tetrahedron inscribed in the unit sphere.
pub fn tetra_sphere() -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(
        tetra_vertices().to_vec(),
        &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
    )
    .unwrap()
    .with_name("tetra")
}

/// Unit-sphere icosahedron refined `level` times by midpoint subdivision.
/// Level `l` has `10·4^l + 2` vertices.
pub fn icosphere(level: usize) -> Result<SimplicialComplex> {
    if level > 4 {
        return Err(Error::InvalidParameter {
            name: "level",
            msg: format!("{level} exceeds 4"),
        });
    }
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (pa, pb) = (verts[a], verts[b]);
                verts.push(normalize([
                    pa[0] + pb[0],
                    pa[1] + pb[1],
                    pa[2] + pb[2],
                ]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    let tops: Vec<Vec<usize>> = tris.iter().map(|t| t.to_vec()).collect();
    Ok(SimplicialComplex::from_top_simplices(verts, &tops)?.with_name(format!("ico{level}")))
}

/// `n × n` periodic grid, each cell split along one diagonal, embedded as a
/// ring torus with radii 3 and 1. Counts are `(n², 3n², 2n²)`.
pub fn grid_torus(n: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(Error::InvalidParameter {
            name: "n",
            msg: format!("grid torus needs n >= 3, got {n}"),
        });
    }
    let (big, small) = (3.0, 1.0);
    let mut verts = Vec::with_capacity(n * n);
    for i in 0..n {
        let theta = 2.0 * PI * i as f64 / n as f64;
        for j in 0..n {
            let phi = 2.0 * PI * j as f64 / n as f64;
            let rad = big + small * phi.cos();
            verts.push([rad * theta.cos(), rad * theta.sin(), small * phi.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut tops = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            tops.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tops.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(SimplicialComplex::from_top_simplices(verts, &tops)?.with_name(format!("torus{n}")))
}

/// Reads an ASCII OFF triangle mesh from disk.
pub fn load_off(path: impl AsRef<Path>) -> Result<SimplicialComplex> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map_or_else(|| "off".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(parse_off(&std::fs::read_to_string(path)?)?.with_name(name))
}

/// Parses ASCII OFF. Comments start with `#`; the counts may share the
/// header line. Only triangle faces are accepted.
pub fn parse_off(text: &str) -> Result<SimplicialComplex> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: String| Error::OffParse { line, msg };

    let (hline, header) = lines.next().ok_or_else(|| err(0, "empty file".into()))?;
    let mut head = header.split_whitespace();
    if head.next() != Some("OFF") {
        return Err(err(hline, format!("expected OFF header, found {header:?}")));
    }
    let rest: Vec<&str> = head.collect();
    let (cline, count_tokens) = if rest.is_empty() {
        let (l, s) = lines
            .next()
            .ok_or_else(|| err(hline, "missing counts line".into()))?;
        (l, s.split_whitespace().collect::<Vec<_>>())
    } else {
        (hline, rest)
    };
    if count_tokens.len() < 2 {
        return Err(err(cline, "counts line needs vertex and face counts".into()));
    }
    let parse_count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| err(cline, format!("bad count {s:?}")))
    };
    let nv = parse_count(count_tokens[0])?;
    let nf = parse_count(count_tokens[1])?;
    if nf == 0 {
        return Err(err(cline, "face list is empty".into()));
    }

    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines
            .next()
            .ok_or_else(|| err(cline, format!("expected {nv} vertices, file ended")))?;
        let xyz: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(l, format!("bad coordinate: {e}")))?;
        if xyz.len() < 3 {
            return Err(err(l, format!("vertex needs 3 coordinates, found {}", xyz.len())));
        }
        verts.push([xyz[0], xyz[1], xyz[2]]);
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines
            .next()
            .ok_or_else(|| err(cline, format!("expected {nf} faces, file ended")))?;
        let idx: Vec<usize> = s
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(l, format!("bad index: {e}")))?;
        match idx.first() {
            Some(3) if idx.len() >= 4 => {}
            Some(3) => return Err(err(l, "face lists fewer than 3 vertices".into())),
            Some(n) => return Err(err(l, format!("non-triangle face with {n} vertices"))),
            None => return Err(err(l, "empty face line".into())),
        }
        if let Some(&v) = idx[1..4].iter().find(|&&v| v >= nv) {
            return Err(err(l, format!("face references vertex {v} but only {nv} exist")));
        }
        faces.push(idx[1..4].to_vec());
    }

    let complex = SimplicialComplex::from_top_simplices(verts, &faces)?;
    let issues = complex.validate();
    if !issues.is_empty() {
        return Err(Error::InvalidComplex(issues.join("; ")));
    }
    Ok(complex.with_name("off"))
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA_OFF: &str = "OFF\n# regular tetrahedron\n4 4 6\n\
        1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n\
        3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn tetra_off_counts() {
        let c = parse_off(TETRA_OFF).unwrap();
        assert_eq!(c.counts(), vec![4, 6, 4]);
    }

    #[test]
    fn torus_off_round_trip_counts() {
        let torus = grid_torus(8).unwrap();
        let counts = torus.counts();
        // Euler count on the grid construction: V − E + F = n² − 3n² + 2n² = 0.
        let n = 8usize;
        assert_eq!(counts, vec![n * n, 3 * n * n, 2 * n * n]);
        assert_eq!(counts[0] as i64 - counts[1] as i64 + counts[2] as i64, 0);
        let reread = parse_off(&torus.to_off()).unwrap();
        assert_eq!(reread.counts(), vec![64, 192, 128]);
        assert_eq!(reread, torus.with_name("off"));
    }

    #[test]
    fn load_off_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tetra.off");
        std::fs::write(&path, TETRA_OFF).unwrap();
        let c = load_off(&path).unwrap();
        assert_eq!(c.counts(), vec![4, 6, 4]);
        assert_eq!(c.name(), "tetra");
        assert!(matches!(load_off(dir.path().join("nope.off")), Err(Error::Io(_))));
    }

    #[test]
    fn off_errors() {
        assert!(matches!(parse_off("OFF\n3 0 0\n0 0 0\n1 0 0\n0 1 0\n"), Err(Error::OffParse { .. })));
        assert!(matches!(parse_off("PLY\n"), Err(Error::OffParse { line: 1, .. })));
        assert!(matches!(parse_off(""), Err(Error::OffParse { .. })));
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(parse_off(quad).unwrap_err().to_string().contains("non-triangle"));
        let dangling = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n";
        assert!(parse_off(dangling).unwrap_err().to_string().contains("vertex 9"));
        let short = "OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        assert!(parse_off(short).is_err());
        let badnum = "OFF\nx 1 0\n";
        assert!(parse_off(badnum).is_err());
    }

    #[test]
    fn counts_on_header_line() {
        let c = parse_off("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 2 1 0\n").unwrap();
        assert_eq!(c.counts(), vec![3, 3, 1]);
    }

    #[test]
    fn icosphere_counts() {
        for (level, v) in [(0, 12), (1, 42), (2, 162)] {
            let c = icosphere(level).unwrap();
            assert_eq!(c.count(0), v);
            assert_eq!(c.euler_characteristic(), 2);
        }
        assert_eq!(icosphere(2).unwrap().counts(), vec![162, 480, 320]);
    }

    #[test]
    fn builtin_lookup() {
        assert_eq!(builtin("torus8").unwrap().counts(), vec![64, 192, 128]);
        assert_eq!(builtin("tetra").unwrap().counts(), vec![4, 6, 4]);
        let e = builtin("klein").unwrap_err().to_string();
        assert!(e.contains("torus8") && e.contains("ico2"), "{e}");
        assert!(builtin("torus9").is_err());
    }

    #[test]
    fn grid_torus_rejects_small_n() {
        assert!(grid_torus(2).is_err());
    }
}
