//! OFF triangle-mesh reader and writer.

use std::fmt::Write as _;
use std::path::Path;

use super::SurfaceMesh;
use crate::error::{Error, Result};

pub fn load_mesh(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    parse_off(&std::fs::read_to_string(path)?)
}

pub fn save_mesh(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_off(mesh)?)?;
    Ok(())
}

/// Writes positions with 17 significant digits, which round-trips `f64`.
pub fn format_off(mesh: &SurfaceMesh) -> Result<String> {
    let pos = mesh
        .positions()
        .ok_or_else(|| Error::InvalidMesh("OFF output needs vertex positions".into()))?;
    let mut out = String::new();
    writeln!(out, "OFF").unwrap();
    writeln!(out, "{} {} 0", pos.len(), mesh.faces().len()).unwrap();
    for p in pos {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]).unwrap();
    }
    for f in mesh.faces() {
        writeln!(out, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    Ok(out)
}

pub fn parse_off(text: &str) -> Result<SurfaceMesh> {
    // Tokens with their 1-based line numbers, comments stripped.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let err = |line: usize, msg: &str| Error::OffParse {
        line,
        msg: msg.to_string(),
    };

    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let mut head_tokens: Vec<&str> = header.split_whitespace().collect();
    if head_tokens.first() != Some(&"OFF") {
        return Err(err(hline, "missing OFF header"));
    }
    head_tokens.remove(0);
    let (cline, counts) = if head_tokens.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| err(hline, "missing counts"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (hline, head_tokens)
    };
    if counts.len() < 2 {
        return Err(err(cline, "expected vertex and face counts"));
    }
    let parse_count = |s: &str| -> Result<usize> {
        let v: i64 = s.parse().map_err(|_| err(cline, &format!("bad count '{s}'")))?;
        usize::try_from(v).map_err(|_| err(cline, &format!("negative count {v}")))
    };
    let nv = parse_count(counts[0])?;
    let nf = parse_count(counts[1])?;

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines
            .next()
            .ok_or_else(|| err(cline, "unexpected end of vertex list"))?;
        let xs: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(l, &format!("bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if xs.len() != 3 {
            return Err(err(l, "vertex needs three coordinates"));
        }
        positions.push([xs[0], xs[1], xs[2]]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| err(cline, "unexpected end of face list"))?;
        let ids: Vec<i64> = s
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| err(l, &format!("bad index '{t}'"))))
            .collect::<Result<_>>()?;
        match ids.first() {
            Some(3) if ids.len() >= 4 => {}
            Some(&k) => return Err(err(l, &format!("only triangles are supported, got a {k}-gon"))),
            None => return Err(err(l, "empty face")),
        }
        let mut f = [0usize; 3];
        for i in 0..3 {
            f[i] = usize::try_from(ids[i + 1])
                .ok()
                .filter(|&v| v < nv)
                .ok_or_else(|| err(l, &format!("vertex index {} out of range", ids[i + 1])))?;
        }
        faces.push(f);
    }
    SurfaceMesh::from_positions(positions, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::generators::icosphere;

    #[test]
    fn round_trip_icosphere() {
        let m = icosphere(2).unwrap();
        let text = format_off(&m).unwrap();
        let back = parse_off(&text).unwrap();
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.positions(), m.positions());
        assert_eq!(format_off(&back).unwrap(), text);
    }

    #[test]
    fn rejects_quads() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(parse_off(text), Err(Error::OffParse { line: 7, .. })));
    }

    #[test]
    fn rejects_negative_count() {
        assert!(matches!(parse_off("OFF\n-3 1 0\n"), Err(Error::OffParse { .. })));
    }

    #[test]
    fn rejects_missing_header() {
        assert!(parse_off("3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").is_err());
    }

    #[test]
    fn header_with_counts_and_comments() {
        let text = "# a triangle\nOFF 3 1 0\n0 0 0\n1 0 0 # x\n0 1 0\n3 0 1 2\n";
        let m = parse_off(text).unwrap();
        assert!((m.total_area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn intrinsic_mesh_cannot_be_saved() {
        let t = crate::manifold::generators::flat_torus(4, 4, 1.0, 1.0).unwrap();
        assert!(format_off(&t.mesh).is_err());
    }
}
