//! Minimal ASCII PLY reader: vertex positions only.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::solvers::Point3;

#[derive(Debug, Error)]
pub enum PlyError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported PLY format: {0}")]
    UnsupportedFormat(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> PlyError {
    PlyError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String),
    List,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

pub fn load_ply(path: impl AsRef<Path>) -> Result<Vec<Point3>, PlyError> {
    parse_ply(BufReader::new(File::open(path)?))
}

/// Reads the `x`, `y`, `z` properties of the `vertex` element in file order.
/// Other elements and properties are skipped.
pub fn parse_ply<R: BufRead>(reader: R) -> Result<Vec<Point3>, PlyError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let magic = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(parse_err(1, "empty file")),
    };
    if magic.trim() != "ply" {
        return Err(parse_err(1, "missing 'ply' magic"));
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut saw_format = false;
    let mut last_line = 1;
    let mut header_done = false;
    for (n, line) in lines.by_ref() {
        let line = line?;
        last_line = n;
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                match tok.next() {
                    Some("ascii") => {}
                    Some(other) => return Err(PlyError::UnsupportedFormat(other.to_string())),
                    None => return Err(parse_err(n, "format line without a format")),
                }
                saw_format = true;
            }
            Some("element") => {
                let (Some(name), Some(count)) = (tok.next(), tok.next()) else {
                    return Err(parse_err(n, "malformed element line"));
                };
                let count = count
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad element count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let Some(el) = elements.last_mut() else {
                    return Err(parse_err(n, "property before any element"));
                };
                let words: Vec<&str> = tok.collect();
                let prop = match words.as_slice() {
                    ["list", _, _, _] => Property::List,
                    [_, name] => Property::Scalar((*name).to_string()),
                    _ => return Err(parse_err(n, "malformed property line")),
                };
                el.properties.push(prop);
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            Some(other) => return Err(parse_err(n, format!("unexpected header keyword '{other}'"))),
        }
    }
    if !header_done {
        return Err(parse_err(last_line, "header ended without end_header"));
    }
    if !saw_format {
        return Err(parse_err(last_line, "header has no format line"));
    }

    let mut points = Vec::new();
    for el in &elements {
        let is_vertex = el.name == "vertex";
        let position = |axis: &str| {
            el.properties
                .iter()
                .position(|p| matches!(p, Property::Scalar(name) if name == axis))
        };
        let xyz = if is_vertex {
            match (position("x"), position("y"), position("z")) {
                (Some(x), Some(y), Some(z)) => Some([x, y, z]),
                _ => return Err(parse_err(last_line, "vertex element lacks x, y, z properties")),
            }
        } else {
            None
        };
        let has_list = el.properties.iter().any(|p| matches!(p, Property::List));
        for _ in 0..el.count {
            let Some((n, line)) = lines.next() else {
                return Err(parse_err(
                    last_line + 1,
                    format!("unexpected end of file in element '{}'", el.name),
                ));
            };
            let line = line?;
            last_line = n;
            let Some(xyz) = xyz else { continue };
            if has_list {
                return Err(PlyError::UnsupportedFormat("list properties on vertices".into()));
            }
            let values: Vec<&str> = line.split_whitespace().collect();
            if values.len() != el.properties.len() {
                return Err(parse_err(
                    n,
                    format!("expected {} values, found {}", el.properties.len(), values.len()),
                ));
            }
            let mut p = Point3::zeros();
            for (k, &col) in xyz.iter().enumerate() {
                p[k] = values[col]
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad coordinate '{}'", values[col])))?;
            }
            points.push(p);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Result<Vec<Point3>, PlyError> {
        parse_ply(Cursor::new(s))
    }

    #[test]
    fn three_vertices() {
        let pts = parse(
            "ply\nformat ascii 1.0\ncomment hand written\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 0 0\n0.5 -2 3e-1\n",
        )
        .unwrap();
        assert_eq!(
            pts,
            vec![Point3::zeros(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.5, -2.0, 0.3)]
        );
    }

    #[test]
    fn extra_properties_and_faces() {
        let src = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float nx\nproperty float x\nproperty float y\nproperty float ny\nproperty float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n9 1 2 9 3 255\n9 4 5 9 6 0\n3 0 1 1\n";
        let pts = parse(src).unwrap();
        assert_eq!(pts, vec![Point3::new(1.0, 2.0, 3.0), Point3::new(4.0, 5.0, 6.0)]);
    }

    #[test]
    fn truncated_header() {
        let err = parse("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n").unwrap_err();
        match err {
            PlyError::Parse { message, line } => {
                assert!(message.contains("end_header"));
                assert_eq!(line, 4);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn binary_is_unsupported() {
        let err = parse("ply\nformat binary_little_endian 1.0\nend_header\n").unwrap_err();
        assert!(matches!(err, PlyError::UnsupportedFormat(_)));
    }

    #[test]
    fn bad_rows_report_line_numbers() {
        let head = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
        match parse(&format!("{head}1 2 3\n1 2\n")).unwrap_err() {
            PlyError::Parse { line, .. } => assert_eq!(line, 9),
            e => panic!("unexpected {e:?}"),
        }
        match parse(&format!("{head}1 2 3\n1 2 x\n")).unwrap_err() {
            PlyError::Parse { line, .. } => assert_eq!(line, 9),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(parse(&format!("{head}1 2 3\n")), Err(PlyError::Parse { .. })));
        assert!(matches!(parse("solid\n"), Err(PlyError::Parse { line: 1, .. })));
    }
}
