//! Mesh file readers.
//!
//! Two formats are understood:
//!
//! * TetGen `.node` / `.ele` pairs. Each file starts with a counts header,
//!   followed by one indexed row per entry. Indexing may start at 0 or 1; the
//!   base is taken from the first node row.
//! * A structured text format (`.tmesh`) with `vertices <n>` and `tets <m>`
//!   sections, each followed by unindexed rows.
//!
//! `#` starts a comment in both formats.

use super::{MeshData, MeshError};
use nalgebra::Vector3;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    TetGen,
    Structured,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "node" | "ele" => Some(MeshFormat::TetGen),
            "tmesh" | "txt" => Some(MeshFormat::Structured),
            _ => None,
        }
    }
}

impl std::str::FromStr for MeshFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tetgen" | "node" | "ele" => Ok(MeshFormat::TetGen),
            "structured" | "tmesh" => Ok(MeshFormat::Structured),
            other => Err(format!("unknown mesh format `{other}`")),
        }
    }
}

fn read(path: &Path) -> Result<String, MeshError> {
    std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads raw geometry from `path`. `format = None` selects by extension.
/// For TetGen input either the `.node` or the `.ele` path may be given.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<MeshData, MeshError> {
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| MeshError::UnknownFormat(path.display().to_string()))?;
    match format {
        MeshFormat::TetGen => {
            let node: PathBuf = path.with_extension("node");
            let ele: PathBuf = path.with_extension("ele");
            parse_tetgen(&read(&node)?, &read(&ele)?)
        }
        MeshFormat::Structured => parse_structured(&read(path)?),
    }
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn lines(src: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    src.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = l.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn num<T: std::str::FromStr>(tok: Option<&&str>, line: usize, what: &str) -> Result<T, MeshError> {
    let tok = tok.ok_or_else(|| MeshError::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| MeshError::Parse {
        line,
        msg: format!("invalid {what} `{tok}`"),
    })
}

pub fn parse_tetgen(node_src: &str, ele_src: &str) -> Result<MeshData, MeshError> {
    let mut node_lines = lines(node_src);
    let (hl, header) = node_lines.next().ok_or(MeshError::Parse {
        line: 0,
        msg: "empty .node file".into(),
    })?;
    let n: usize = num(header.first(), hl, "node count")?;
    let dim: usize = num(header.get(1), hl, "dimension")?;
    if dim != 3 {
        return Err(MeshError::Parse {
            line: hl,
            msg: format!("expected dimension 3, got {dim}"),
        });
    }
    let mut base = None;
    let mut vertices = vec![Vector3::zeros(); n];
    let mut seen = 0;
    for (line, row) in node_lines.take(n) {
        let idx: usize = num(row.first(), line, "node index")?;
        let b = *base.get_or_insert(idx.min(1));
        let k = idx.checked_sub(b).filter(|&k| k < n).ok_or(MeshError::Parse {
            line,
            msg: format!("node index {idx} out of range"),
        })?;
        for (c, v) in vertices[k].iter_mut().enumerate() {
            *v = num(row.get(c + 1), line, "coordinate")?;
        }
        seen += 1;
    }
    if seen != n {
        return Err(MeshError::Parse {
            line: 0,
            msg: format!("expected {n} nodes, found {seen}"),
        });
    }
    let base = base.unwrap_or(0);

    let mut ele_lines = lines(ele_src);
    let (hl, header) = ele_lines.next().ok_or(MeshError::Parse {
        line: 0,
        msg: "empty .ele file".into(),
    })?;
    let m: usize = num(header.first(), hl, "tet count")?;
    let per: usize = num(header.get(1), hl, "nodes per tet")?;
    if per != 4 {
        return Err(MeshError::Parse {
            line: hl,
            msg: format!("only linear tets are supported, got {per} nodes per element"),
        });
    }
    let mut tets = Vec::with_capacity(m);
    for (line, row) in ele_lines.take(m) {
        let mut t = [0; 4];
        for (c, slot) in t.iter_mut().enumerate() {
            let v: usize = num(row.get(c + 1), line, "vertex index")?;
            *slot = v.checked_sub(base).ok_or(MeshError::Parse {
                line,
                msg: format!("vertex index {v} below base {base}"),
            })?;
        }
        tets.push(t);
    }
    if tets.len() != m {
        return Err(MeshError::Parse {
            line: 0,
            msg: format!("expected {m} tets, found {}", tets.len()),
        });
    }
    Ok(MeshData { vertices, tets })
}

pub fn parse_structured(src: &str) -> Result<MeshData, MeshError> {
    enum Section {
        None,
        Vertices(usize),
        Tets(usize),
    }
    let mut data = MeshData::default();
    let mut section = Section::None;
    for (line, row) in lines(src) {
        match row[0] {
            "vertices" => {
                section = Section::Vertices(num(row.get(1), line, "vertex count")?);
                continue;
            }
            "tets" => {
                section = Section::Tets(num(row.get(1), line, "tet count")?);
                continue;
            }
            _ => {}
        }
        match &mut section {
            Section::Vertices(left) if *left > 0 => {
                let mut v = Vector3::zeros();
                for c in 0..3 {
                    v[c] = num(row.get(c), line, "coordinate")?;
                }
                data.vertices.push(v);
                *left -= 1;
            }
            Section::Tets(left) if *left > 0 => {
                let mut t = [0; 4];
                for (c, slot) in t.iter_mut().enumerate() {
                    *slot = num(row.get(c), line, "vertex index")?;
                }
                data.tets.push(t);
                *left -= 1;
            }
            _ => {
                return Err(MeshError::Parse {
                    line,
                    msg: "row outside of a section or section overflow".into(),
                })
            }
        }
    }
    if let Section::Vertices(left) | Section::Tets(left) = section {
        if left > 0 {
            return Err(MeshError::Parse {
                line: 0,
                msg: format!("section truncated, {left} rows missing"),
            });
        }
    }
    Ok(data)
}
