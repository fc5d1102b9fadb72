//! Plain-text matrix dumps.
//!
//! ```text
//! # rows=4 cols=4 internal_dim=4 floquet_copies=1
//! 1.0000000000000000e0+0.0000000000000000e0j,0.0000000000000000e0+0.0000000000000000e0j,...
//! ```
//!
//! Every entry is written with 17 significant digits, which round-trips any
//! f64 exactly, including signed zeros.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use faer::{c64, Mat};

use crate::blockop::{BlockOperator, Layout};

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed dump at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn parse_err(line: usize, msg: impl Into<String>) -> DumpError {
    DumpError::Parse { line, msg: msg.into() }
}

pub fn format_entry(z: c64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{:.16e}{sign}{:.16e}j", z.re, z.im)
}

pub fn parse_entry(s: &str) -> Option<c64> {
    let body = s.trim().strip_suffix('j')?;
    let bytes = body.as_bytes();
    // the separator is the last sign not belonging to an exponent
    let cut = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re: f64 = body[..cut].parse().ok()?;
    let im_str = &body[cut..];
    let im: f64 = im_str.strip_prefix('+').unwrap_or(im_str).parse().ok()?;
    Some(c64::new(re, im))
}

pub fn header(a: &BlockOperator) -> String {
    let l = a.layout();
    format!(
        "# rows={n} cols={n} internal_dim={} floquet_copies={}",
        l.internal_dim,
        l.floquet_copies,
        n = a.dim()
    )
}

pub fn write_matrix(a: &BlockOperator, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", header(a))?;
    let n = a.dim();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_entry(a.get(i, j))).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn dump_matrix(a: &BlockOperator, path: &Path) -> Result<(), DumpError> {
    let io = |source| DumpError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_matrix(a, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

fn header_field(fields: &[(&str, &str)], key: &str) -> Result<usize, DumpError> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .and_then(|(_, v)| v.parse().ok())
        .ok_or_else(|| parse_err(1, format!("header lacks {key}")))
}

pub fn read_matrix(input: impl BufRead) -> Result<BlockOperator, DumpError> {
    let mut lines = input.lines();
    let io = |source| DumpError::Io {
        path: "<stream>".into(),
        source,
    };
    let head = lines.next().ok_or_else(|| parse_err(1, "empty dump"))?.map_err(io)?;
    let head = head
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "missing '#' header"))?;
    let fields: Vec<(&str, &str)> = head.split_whitespace().filter_map(|f| f.split_once('=')).collect();
    let rows = header_field(&fields, "rows")?;
    let cols = header_field(&fields, "cols")?;
    let d = header_field(&fields, "internal_dim")?;
    let k = header_field(&fields, "floquet_copies")?;
    if rows != cols {
        return Err(parse_err(1, format!("non-square {rows}x{cols}")));
    }
    let layout = Layout::new(d, k).map_err(|e| parse_err(1, e.to_string()))?;
    if layout.side() != rows {
        return Err(parse_err(1, format!("rows={rows} disagrees with layout {d}x{k}")));
    }

    let mut data = Mat::<c64>::zeros(rows, cols);
    let mut seen = 0;
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        if seen == rows {
            return Err(parse_err(i + 2, "more rows than declared"));
        }
        let entries: Vec<&str> = line.split(',').collect();
        if entries.len() != cols {
            return Err(parse_err(i + 2, format!("expected {cols} entries, got {}", entries.len())));
        }
        for (j, e) in entries.iter().enumerate() {
            data[(seen, j)] = parse_entry(e).ok_or_else(|| parse_err(i + 2, format!("bad entry '{e}'")))?;
        }
        seen += 1;
    }
    if seen != rows {
        return Err(parse_err(rows + 1, format!("expected {rows} rows, got {seen}")));
    }
    BlockOperator::new(data, layout).map_err(|e| parse_err(1, e.to_string()))
}

pub fn load_matrix(path: &Path) -> Result<BlockOperator, DumpError> {
    let f = File::open(path).map_err(|source| DumpError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_matrix(BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockop::beta_matrix;
    use proptest::prelude::*;

    fn roundtrip(a: &BlockOperator) -> BlockOperator {
        let mut buf = Vec::new();
        write_matrix(a, &mut buf).unwrap();
        read_matrix(buf.as_slice()).unwrap()
    }

    fn bits(a: &BlockOperator) -> Vec<(u64, u64)> {
        let n = a.dim();
        (0..n * n)
            .map(|k| {
                let z = a.get(k / n, k % n);
                (z.re.to_bits(), z.im.to_bits())
            })
            .collect()
    }

    #[test]
    fn beta_dump_lines() {
        let beta = beta_matrix(4, 1).unwrap().to_operator();
        let mut buf = Vec::new();
        write_matrix(&beta, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# rows=4 cols=4 internal_dim=4 floquet_copies=1");
        assert_eq!(lines.len(), 5);
        for (i, line) in lines[1..].iter().enumerate() {
            for (j, e) in line.split(',').enumerate() {
                let z = parse_entry(e).unwrap();
                let want = if i != j { 0.0 } else if i < 2 { 1.0 } else { -1.0 };
                assert_eq!(z, c64::new(want, 0.0));
            }
        }
        assert!(lines[1].starts_with("1.0000000000000000e0+0.0000000000000000e0j,"));
    }

    #[test]
    fn entry_formats() {
        assert_eq!(format_entry(c64::new(-1.5, -0.25)), "-1.5000000000000000e0-2.5000000000000000e-1j");
        let z = parse_entry("-0.0000000000000000e0-0.0000000000000000e0j").unwrap();
        assert!(z.re.is_sign_negative() && z.im.is_sign_negative());
        assert_eq!(parse_entry("1e5+2e-3j"), Some(c64::new(1e5, 2e-3)));
        assert_eq!(parse_entry("1e5"), None);
        assert_eq!(parse_entry("abc+1j"), None);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_matrix("".as_bytes()).is_err());
        assert!(read_matrix("# rows=2 cols=2 internal_dim=2 floquet_copies=1\n1+0j,0+0j\n".as_bytes()).is_err());
        assert!(read_matrix("# rows=2 cols=2 internal_dim=4 floquet_copies=1\n".as_bytes()).is_err());
        assert!(read_matrix("# rows=2 cols=2 internal_dim=2 floquet_copies=1\n1+0j,x\n0+0j,1+0j\n".as_bytes()).is_err());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let beta = beta_matrix(2, 1).unwrap().to_operator();
        let err = dump_matrix(&beta, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(matches!(err, DumpError::Io { .. }));
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(
            vals in proptest::collection::vec((any::<f64>(), any::<f64>()), 16),
            copies in 1usize..=2,
        ) {
            let layout = Layout::new(2, copies).unwrap();
            let n = layout.side();
            let a = BlockOperator::from_fn(layout, |i, j| {
                let (re, im) = vals[(i * n + j) % vals.len()];
                let fix = |x: f64| if x.is_finite() { x } else { -0.0 };
                c64::new(fix(re), fix(im))
            });
            prop_assert_eq!(bits(&roundtrip(&a)), bits(&a));
            prop_assert_eq!(roundtrip(&a).layout(), a.layout());
        }
    }
}
