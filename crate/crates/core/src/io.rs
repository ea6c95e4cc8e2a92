//! File formats: edge-list text, FMTX binary and CSV features, label files
//! and the cluster-model blob. All numeric payloads are f64.
//!
//! Edge lists hold one `u v w` line per undirected edge with `u < v`; `#`
//! lines are comments. Weights are written in shortest round-trip form, so a
//! write/read cycle is exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::clustering::{ClusterMethod, ClusterModel};
use crate::error::{Error, Result};
use crate::graph::{build_graph, EdgeList, FeatureMatrix, Graph};

const FMTX_MAGIC: &[u8; 4] = b"FMTX";
const MODEL_MAGIC: &[u8; 4] = b"MCLU";
const MODEL_VERSION: u32 = 1;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses an edge list. With `n` given, node ids must be below it.
pub fn read_edges<R: BufRead>(reader: R, n: Option<usize>) -> Result<EdgeList<f64>> {
    let mut seen = std::collections::HashMap::new();
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(parse_err(lineno, format!("expected `u v w`, got {} fields", fields.len())));
        }
        let id = |s: &str| s.parse::<usize>().map_err(|e| parse_err(lineno, format!("bad node id '{s}': {e}")));
        let (mut u, mut v) = (id(fields[0])?, id(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|e| parse_err(lineno, format!("bad weight '{s}': {e}")))?,
            None => 1.0,
        };
        if u == v {
            return Err(parse_err(lineno, format!("self-loop on node {u}")));
        }
        if let Some(n) = n {
            if u >= n || v >= n {
                return Err(parse_err(lineno, format!("node id {} out of range for n = {n}", u.max(v))));
            }
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(parse_err(lineno, format!("weight {w} is not positive and finite")));
        }
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        if let Some(first) = seen.insert((u, v), lineno) {
            return Err(parse_err(lineno, format!("duplicate edge ({u}, {v}), first listed on line {first}")));
        }
        edges.push((u, v, w));
    }
    EdgeList::new(edges)
}

/// Node count recorded in the header comment written by [`write_edges`].
fn header_nodes(path: &Path) -> Result<Option<usize>> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(first
        .trim()
        .strip_prefix("# nodes ")
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok()))
}

/// Reads an edge-list file into a graph. Without `n`, the header comment is
/// used if present, otherwise the largest id plus one.
pub fn read_graph(path: impl AsRef<Path>, n: Option<usize>) -> Result<Graph<f64>> {
    let path = path.as_ref();
    let n = match n {
        Some(n) => Some(n),
        None => header_nodes(path)?,
    };
    let edges = read_edges(BufReader::new(File::open(path)?), n)?;
    let n = n.unwrap_or_else(|| edges.max_node().map_or(0, |m| m + 1));
    build_graph(n, &edges)
}

/// Writes `g` as an edge list preceded by a `# nodes N edges M` comment.
pub fn write_edges<W: Write>(g: &Graph<f64>, mut w: W) -> Result<()> {
    writeln!(w, "# nodes {} edges {}", g.n(), g.num_edges())?;
    for e in g.edges().iter() {
        writeln!(w, "{} {} {}", e.u, e.v, e.w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_graph(g: &Graph<f64>, path: impl AsRef<Path>) -> Result<()> {
    write_edges(g, BufWriter::new(File::create(path)?))
}

/// Writes the FMTX binary form.
pub fn write_fmtx<W: Write>(x: &FeatureMatrix<f64>, mut w: W) -> Result<()> {
    w.write_all(FMTX_MAGIC)?;
    w.write_all(&(x.n() as u64).to_le_bytes())?;
    w.write_all(&(x.d() as u64).to_le_bytes())?;
    for v in x.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the FMTX binary form.
pub fn read_fmtx<R: Read>(mut r: R) -> Result<FeatureMatrix<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("file too short for FMTX header".into()))?;
    if &magic != FMTX_MAGIC {
        return Err(Error::Format("missing FMTX magic".into()));
    }
    let mut word = [0u8; 8];
    let mut read_u64 = |r: &mut R, what: &str| -> Result<usize> {
        r.read_exact(&mut word).map_err(|_| Error::Format(format!("truncated FMTX header ({what})")))?;
        usize::try_from(u64::from_le_bytes(word)).map_err(|_| Error::Format(format!("{what} too large")))
    };
    let n = read_u64(&mut r, "n")?;
    let d = read_u64(&mut r, "d")?;
    let len = n.checked_mul(d).ok_or_else(|| Error::Format("n·d overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::Format(format!(
            "FMTX payload holds {} bytes, expected {} for {n}×{d}",
            bytes.len(),
            len * 8
        )));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    FeatureMatrix::new(n, d, data)
}

/// Writes CSV with a `f0,f1,…` header.
pub fn write_csv<W: Write>(x: &FeatureMatrix<f64>, mut w: W) -> Result<()> {
    let header: Vec<String> = (0..x.d()).map(|j| format!("f{j}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in x.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads CSV whose first line is a header naming the columns.
pub fn read_csv<R: BufRead>(r: R) -> Result<FeatureMatrix<f64>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV file".into()))??;
    let d = header.split(',').count();
    let mut data = Vec::new();
    let mut n = 0;
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != d {
            return Err(parse_err(lineno, format!("expected {d} columns, got {}", cells.len())));
        }
        for c in cells {
            let v: f64 = c.trim().parse().map_err(|e| parse_err(lineno, format!("bad number '{c}': {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, format!("non-finite entry '{c}'")));
            }
            data.push(v);
        }
        n += 1;
    }
    FeatureMatrix::new(n, d, data)
}

/// Reads features, choosing FMTX when the file starts with its magic bytes
/// and CSV otherwise.
pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix<f64>> {
    let mut f = BufReader::new(File::open(path)?);
    let is_fmtx = f.fill_buf()?.starts_with(FMTX_MAGIC);
    if is_fmtx {
        read_fmtx(f)
    } else {
        read_csv(f)
    }
}

/// Writes CSV for a `.csv` path and FMTX otherwise.
pub fn write_features(x: &FeatureMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let w = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(x, w)
    } else {
        write_fmtx(x, w)
    }
}

/// One label per line; blank and `#` lines ignored.
pub fn read_labels<R: BufRead>(r: R) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|e| parse_err(idx + 1, format!("bad label '{t}': {e}")))?);
    }
    Ok(out)
}

pub fn read_labels_file(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    read_labels(BufReader::new(File::open(path)?))
}

pub fn write_labels<W: Write>(labels: &[usize], mut w: W) -> Result<()> {
    for l in labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_labels_file(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    write_labels(labels, BufWriter::new(File::create(path)?))
}

/// Serializes a model's method and centroids.
pub fn write_model<W: Write>(m: &ClusterModel<f64>, mut w: W) -> Result<()> {
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    w.write_all(&m.method.tag().to_le_bytes())?;
    w.write_all(&(m.k as u64).to_le_bytes())?;
    w.write_all(&(m.d() as u64).to_le_bytes())?;
    for v in m.centroids.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a model written by [`write_model`]; training assignments are not stored.
pub fn read_model<R: Read>(mut r: R) -> Result<ClusterModel<f64>> {
    let mut head = [0u8; 4 + 4 + 4 + 8 + 8];
    r.read_exact(&mut head).map_err(|_| Error::Format("truncated model header".into()))?;
    if &head[..4] != MODEL_MAGIC {
        return Err(Error::Format("missing MCLU magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let tag = u32::from_le_bytes(head[8..12].try_into().unwrap());
    let method = ClusterMethod::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown method tag {tag}")))?;
    let k = u64::from_le_bytes(head[12..20].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(head[20..28].try_into().unwrap()) as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if Some(bytes.len()) != k.checked_mul(d).and_then(|x| x.checked_mul(8)) {
        return Err(Error::Format("model payload does not match k × d".into()));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    ClusterModel::from_centroids(method, FeatureMatrix::new(k, d, data)?)
}

pub fn write_model_file(m: &ClusterModel<f64>, path: impl AsRef<Path>) -> Result<()> {
    write_model(m, BufWriter::new(File::create(path)?))
}

pub fn read_model_file(path: impl AsRef<Path>) -> Result<ClusterModel<f64>> {
    read_model(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_text_round_trip() {
        let g = build_graph(5, &EdgeList::new([(0, 1, 0.1), (1, 4, 2.0 / 3.0), (2, 3, 1e-9)]).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_edges(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# nodes 5 edges 3\n0 1 0.1\n"));
        let e = read_edges(&buf[..], Some(5)).unwrap();
        assert_eq!(build_graph(5, &e).unwrap(), g);
    }

    #[test]
    fn edge_errors_name_lines() {
        let text = "# header\n0 1 1.0\n2 3 0.5\n1 0 2.0\n";
        match read_edges(text.as_bytes(), None) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_edges("0 0 1\n".as_bytes(), None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_edges("0 1 1\n0 5 1\n".as_bytes(), Some(3)), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_edges("0 1 -1\n".as_bytes(), None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_edges("0 x 1\n".as_bytes(), None), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_with_header() {
        let x = read_csv("f0,f1\n1.5,2\n-3,4e-2\n".as_bytes()).unwrap();
        assert_eq!((x.n(), x.d()), (2, 2));
        assert_eq!(x.row(1), &[-3.0, 0.04]);
        assert!(read_csv("a,b\n1,2,3\n".as_bytes()).is_err());
        assert!(read_csv("a,b\n1,NaN\n".as_bytes()).is_err());
    }

    #[test]
    fn fmtx_errors() {
        assert!(read_fmtx(&b"XXXX"[..]).is_err());
        let mut buf = Vec::new();
        write_fmtx(&FeatureMatrix::from_rows(&[[1.0, 2.0]]).unwrap(), &mut buf).unwrap();
        assert!(read_fmtx(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[20..28].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(read_fmtx(&bad[..]).is_err());
    }

    #[test]
    fn model_round_trip() {
        let c = FeatureMatrix::from_rows(&[[0.0, 1.5], [2.0, -3.0], [1e-300, 7.0]]).unwrap();
        let m = ClusterModel::from_centroids(ClusterMethod::Spectral, c).unwrap();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"MCLU");
        assert_eq!(read_model(&buf[..]).unwrap(), m);
        buf[4] = 9;
        assert!(read_model(&buf[..]).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let mut buf = Vec::new();
        write_labels(&[3, 0, 1], &mut buf).unwrap();
        assert_eq!(read_labels(&buf[..]).unwrap(), vec![3, 0, 1]);
        assert!(matches!(read_labels("1\nx\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn fmtx_bit_identical(vals in proptest::collection::vec(-1e300f64..1e300, 40)) {
            let x = FeatureMatrix::new(10, 4, vals).unwrap();
            let mut buf = Vec::new();
            write_fmtx(&x, &mut buf).unwrap();
            let y = read_fmtx(&buf[..]).unwrap();
            prop_assert_eq!(x.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), y.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }

        #[test]
        fn csv_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 12)) {
            let x = FeatureMatrix::new(4, 3, vals).unwrap();
            let mut buf = Vec::new();
            write_csv(&x, &mut buf).unwrap();
            let y = read_csv(&buf[..]).unwrap();
            for (a, b) in x.data().iter().zip(y.data()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
