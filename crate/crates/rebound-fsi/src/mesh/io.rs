//! Plain-text mesh serialization.
//!
//! Four sections, each a header line, a count line, then one record per
//! line: `$Vertices` (x y), `$Triangles` (v0 v1 v2 label), `$InterfaceEdges`
//! (a b), `$BoundaryEdges` (a b tag). Indices are 0-based; labels are
//! 0 = fluid, 1 = solid; tags are 0 = bottom wall, 1 = lateral/top.
//! Coordinates print in shortest round-trip form, so a write/read cycle
//! reproduces the mesh bit for bit.

use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::mesh::{BoundaryTag, EdgeKey, InvariantError, Mesh, Subdomain, Tri};

#[derive(Debug, thiserror::Error)]
pub enum MeshIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh file violates invariants: {0}")]
    Invalid(#[from] InvariantError),
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> io::Result<()> {
    writeln!(w, "$Vertices")?;
    writeln!(w, "{}", mesh.vertices.len())?;
    for p in &mesh.vertices {
        writeln!(w, "{:?} {:?}", p[0], p[1])?;
    }
    writeln!(w, "$Triangles")?;
    writeln!(w, "{}", mesh.triangles.len())?;
    for t in &mesh.triangles {
        let label = match t.label {
            Subdomain::Fluid => 0,
            Subdomain::Solid => 1,
        };
        writeln!(w, "{} {} {} {}", t.v[0], t.v[1], t.v[2], label)?;
    }
    writeln!(w, "$InterfaceEdges")?;
    writeln!(w, "{}", mesh.interface_edges.len())?;
    for e in &mesh.interface_edges {
        writeln!(w, "{} {}", e.a(), e.b())?;
    }
    writeln!(w, "$BoundaryEdges")?;
    writeln!(w, "{}", mesh.boundary_edges.len())?;
    for (e, tag) in &mesh.boundary_edges {
        let t = match tag {
            BoundaryTag::Bottom => 0,
            BoundaryTag::LateralTop => 1,
        };
        writeln!(w, "{} {} {}", e.a(), e.b(), t)?;
    }
    Ok(())
}

struct Lines<R: BufRead> {
    reader: R,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String, MeshIoError> {
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = self.reader.read_line(&mut buf)?;
            self.line_no += 1;
            if n == 0 {
                return Err(MeshIoError::Parse {
                    line: self.line_no,
                    msg: "unexpected end of file".into(),
                });
            }
            let trimmed = buf.trim();
            if !trimmed.is_empty() {
                return Ok(trimmed.to_string());
            }
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, MeshIoError> {
        Err(MeshIoError::Parse { line: self.line_no, msg: msg.into() })
    }

    fn expect_header(&mut self, name: &str) -> Result<(), MeshIoError> {
        let got = self.next()?;
        if got == name {
            Ok(())
        } else {
            self.err(format!("expected section {name}, found {got:?}"))
        }
    }

    fn count(&mut self) -> Result<usize, MeshIoError> {
        let line = self.next()?;
        match line.parse() {
            Ok(n) => Ok(n),
            Err(_) => self.err(format!("expected a count, found {line:?}")),
        }
    }

    fn fields<const N: usize>(&mut self) -> Result<[String; N], MeshIoError> {
        let line = self.next()?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != N {
            return self.err(format!("expected {N} fields, found {}", parts.len()));
        }
        Ok(std::array::from_fn(|i| parts[i].to_string()))
    }
}

pub fn read_mesh<R: BufRead>(reader: R) -> Result<Mesh, MeshIoError> {
    let mut lines = Lines { reader, line_no: 0 };
    let mut mesh = Mesh::default();

    lines.expect_header("$Vertices")?;
    let nv = lines.count()?;
    for _ in 0..nv {
        let [x, y] = lines.fields::<2>()?;
        let parse = |s: &str, lines: &Lines<R>| {
            s.parse::<f64>().map_err(|_| MeshIoError::Parse {
                line: lines.line_no,
                msg: format!("bad coordinate {s:?}"),
            })
        };
        mesh.vertices.push([parse(&x, &lines)?, parse(&y, &lines)?]);
    }

    lines.expect_header("$Triangles")?;
    let nt = lines.count()?;
    for _ in 0..nt {
        let f = lines.fields::<4>()?;
        let mut v = [0usize; 3];
        for (dst, src) in v.iter_mut().zip(&f[..3]) {
            *dst = match src.parse() {
                Ok(i) => i,
                Err(_) => return lines.err(format!("bad vertex index {src:?}")),
            };
        }
        let label = match f[3].as_str() {
            "0" => Subdomain::Fluid,
            "1" => Subdomain::Solid,
            other => return lines.err(format!("bad subdomain label {other:?}")),
        };
        mesh.triangles.push(Tri { v, label });
    }

    lines.expect_header("$InterfaceEdges")?;
    let ni = lines.count()?;
    for _ in 0..ni {
        let [a, b] = lines.fields::<2>()?;
        let (a, b) = match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return lines.err("bad interface edge indices"),
        };
        mesh.interface_edges.insert(EdgeKey::new(a, b));
    }

    lines.expect_header("$BoundaryEdges")?;
    let nb = lines.count()?;
    for _ in 0..nb {
        let [a, b, t] = lines.fields::<3>()?;
        let (a, b) = match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return lines.err("bad boundary edge indices"),
        };
        let tag = match t.as_str() {
            "0" => BoundaryTag::Bottom,
            "1" => BoundaryTag::LateralTop,
            other => return lines.err(format!("bad boundary tag {other:?}")),
        };
        mesh.boundary_edges.insert(EdgeKey::new(a, b), tag);
    }

    mesh.check_invariants()?;
    Ok(mesh)
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    write_mesh(mesh, io::BufWriter::new(file))
}

pub fn load_mesh(path: &Path) -> Result<Mesh, MeshIoError> {
    let file = std::fs::File::open(path)?;
    read_mesh(io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{generate_custom, GeometrySpec, GRADING};

    #[test]
    fn round_trip_is_exact() {
        let m = generate_custom(&GeometrySpec::default(), 48, 0.09, 0.03, GRADING).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(io::Cursor::new(&buf)).unwrap();
        assert_eq!(m.vertices, back.vertices);
        assert!(m.triangles.iter().zip(&back.triangles).all(|(a, b)| a.v == b.v && a.label == b.label));
        assert_eq!(m.interface_edges, back.interface_edges);
        assert_eq!(m.boundary_edges, back.boundary_edges);
        // Bit-exact coordinates survive a second cycle unchanged.
        let mut buf2 = Vec::new();
        write_mesh(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn rejects_malformed_input() {
        let text = "$Vertices\n1\n0.0 0.0\n$Triangles\n1\n0 0 0 2\n";
        let err = read_mesh(io::Cursor::new(text)).unwrap_err();
        assert!(matches!(err, MeshIoError::Parse { .. }), "{err}");

        let text = "$NotASection\n";
        let err = read_mesh(io::Cursor::new(text)).unwrap_err();
        assert!(matches!(err, MeshIoError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_invalid_topology() {
        // Two triangles with inconsistent orientation fail validation.
        let text = "\
$Vertices
4
0.0 0.0
1.0 0.0
1.0 1.0
0.0 1.0
$Triangles
2
0 1 2 0
0 3 2 0
$InterfaceEdges
0
$BoundaryEdges
4
0 1 0
1 2 1
2 3 1
0 3 1
";
        let err = read_mesh(io::Cursor::new(text)).unwrap_err();
        assert!(matches!(err, MeshIoError::Invalid(_)), "{err}");
    }
}
