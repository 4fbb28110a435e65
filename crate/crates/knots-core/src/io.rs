//! Reading, writing and generating curves, and batch execution over many
//! inputs.
//!
//! Two text formats are supported and auto-detected on read: a plain
//! whitespace format (one `x y z` vertex per line, blank line between
//! components, `#` comments) and Geomview VECT (negative vertex counts mark
//! closed polylines). Coordinates are written with 17 significant digits so
//! a write/read round trip reproduces every vertex bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{Link, Point3, PolygonalKnot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Plain,
    Vect,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Strip comments; yield (1-based line number, trimmed content) for
/// non-empty payloads and (line number, "") for blank lines.
fn payload_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, raw)| {
        let no_comment = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        (i + 1, no_comment.trim())
    })
}

pub fn detect_format(text: &str) -> FileFormat {
    for (_, line) in payload_lines(text) {
        if line.is_empty() {
            continue;
        }
        return if line.split_whitespace().next() == Some("VECT") {
            FileFormat::Vect
        } else {
            FileFormat::Plain
        };
    }
    FileFormat::Plain
}

fn parse_plain(text: &str) -> Result<Link> {
    let mut components: Vec<Vec<Point3>> = Vec::new();
    let mut current: Vec<Point3> = Vec::new();
    for (ln, line) in payload_lines(text) {
        if line.is_empty() {
            if !current.is_empty() {
                components.push(std::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(
                ln,
                format!("expected 3 coordinates, found {}", fields.len()),
            ));
        }
        let mut c = [0.0; 3];
        for (k, f) in fields.iter().enumerate() {
            c[k] = f
                .parse::<f64>()
                .map_err(|e| parse_err(ln, format!("bad coordinate {f:?}: {e}")))?;
        }
        current.push(Point3::new(c[0], c[1], c[2]));
    }
    if !current.is_empty() {
        components.push(current);
    }
    if components.is_empty() {
        return Err(parse_err(0, "no vertices in input"));
    }
    let knots = components
        .into_iter()
        .map(PolygonalKnot::new)
        .collect::<Result<Vec<_>>>()?;
    Link::new(knots)
}

fn parse_vect(text: &str) -> Result<Link> {
    // Tokenize with line tracking for error reporting.
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (ln, line) in payload_lines(text) {
        for tok in line.split_whitespace() {
            tokens.push((ln, tok));
        }
    }
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        let t = tokens
            .get(pos)
            .copied()
            .ok_or_else(|| parse_err(tokens.last().map_or(0, |t| t.0), format!("missing {what}")))?;
        pos += 1;
        Ok(t)
    };
    let int = |t: (usize, &str), what: &str| -> Result<i64> {
        t.1.parse::<i64>()
            .map_err(|_| parse_err(t.0, format!("bad {what} {:?}", t.1)))
    };
    let float = |t: (usize, &str)| -> Result<f64> {
        t.1.parse::<f64>()
            .map_err(|_| parse_err(t.0, format!("bad coordinate {:?}", t.1)))
    };

    let head = next("VECT header")?;
    if head.1 != "VECT" {
        return Err(parse_err(head.0, "missing VECT header"));
    }
    let ncomp = int(next("component count")?, "component count")?;
    let nvert = int(next("vertex count")?, "vertex count")?;
    let ncolor = int(next("color count")?, "color count")?;
    if ncomp <= 0 || nvert <= 0 {
        return Err(parse_err(head.0, "empty VECT object"));
    }
    let mut counts = Vec::with_capacity(ncomp as usize);
    for _ in 0..ncomp {
        counts.push(int(next("polyline vertex count")?, "polyline vertex count")?);
    }
    let mut colors = Vec::with_capacity(ncomp as usize);
    for _ in 0..ncomp {
        colors.push(int(next("polyline color count")?, "polyline color count")?);
    }
    if counts.iter().map(|c| c.abs()).sum::<i64>() != nvert {
        return Err(parse_err(head.0, "vertex counts do not add up"));
    }
    if colors.iter().sum::<i64>() != ncolor {
        return Err(parse_err(head.0, "color counts do not add up"));
    }
    let mut knots = Vec::with_capacity(ncomp as usize);
    for &count in &counts {
        // Negative count marks a closed polyline; an open one whose last
        // vertex repeats the first is accepted and closed up.
        let n = count.unsigned_abs() as usize;
        let mut verts = Vec::with_capacity(n);
        for _ in 0..n {
            let t = next("vertex")?;
            let ln = t.0;
            let x = float(t)?;
            let y = float(next("vertex coordinate")?)?;
            let z = float(next("vertex coordinate")?)?;
            let _ = ln;
            verts.push(Point3::new(x, y, z));
        }
        if count > 0 && verts.len() > 1 && verts.first() == verts.last() {
            verts.pop();
        }
        knots.push(PolygonalKnot::new(verts)?);
    }
    for _ in 0..4 * ncolor {
        next("color value")?;
    }
    Link::new(knots)
}

pub fn parse_link(text: &str) -> Result<Link> {
    match detect_format(text) {
        FileFormat::Plain => parse_plain(text),
        FileFormat::Vect => parse_vect(text),
    }
}

pub fn read_link_file(path: impl AsRef<Path>) -> Result<Link> {
    parse_link(&fs::read_to_string(path)?)
}

/// Read a file that must contain exactly one closed curve.
pub fn read_knot_file(path: impl AsRef<Path>) -> Result<PolygonalKnot> {
    let link = read_link_file(path)?;
    if link.components.len() != 1 {
        return Err(Error::InvalidKnot(format!(
            "expected one component, found {}",
            link.components.len()
        )));
    }
    Ok(link.components[0].clone())
}

pub fn format_link(link: &Link, format: FileFormat) -> String {
    let mut out = String::new();
    match format {
        FileFormat::Plain => {
            for (ci, comp) in link.components.iter().enumerate() {
                if ci > 0 {
                    out.push('\n');
                }
                for v in comp.vertices() {
                    writeln!(out, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z).unwrap();
                }
            }
        }
        FileFormat::Vect => {
            let ncomp = link.components.len();
            let nvert: usize = link.components.iter().map(|c| c.len()).sum();
            writeln!(out, "VECT").unwrap();
            writeln!(out, "{ncomp} {nvert} 0").unwrap();
            let counts: Vec<String> = link
                .components
                .iter()
                .map(|c| format!("-{}", c.len()))
                .collect();
            writeln!(out, "{}", counts.join(" ")).unwrap();
            writeln!(out, "{}", vec!["0"; ncomp].join(" ")).unwrap();
            for comp in &link.components {
                for v in comp.vertices() {
                    writeln!(out, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z).unwrap();
                }
            }
        }
    }
    out
}

pub fn write_link_file(path: impl AsRef<Path>, link: &Link, format: FileFormat) -> Result<()> {
    fs::write(path, format_link(link, format))?;
    Ok(())
}

/// One coordinate of a truncated Fourier loop: sum over harmonics j >= 1 of
/// cos[j-1] * cos(j t) + sin[j-1] * sin(j t).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &a) in self.cos.iter().enumerate() {
            acc += a * ((j + 1) as f64 * t).cos();
        }
        for (j, &b) in self.sin.iter().enumerate() {
            acc += b * ((j + 1) as f64 * t).sin();
        }
        acc
    }
}

/// A closed curve given by one truncated Fourier series per coordinate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourierKnotSpec {
    pub x: FourierSeries,
    pub y: FourierSeries,
    pub z: FourierSeries,
}

impl FourierKnotSpec {
    pub fn point(&self, t: f64) -> Point3 {
        Point3::new(self.x.eval(t), self.y.eval(t), self.z.eval(t))
    }

    /// Sample the loop at n equispaced parameters.
    pub fn sample(&self, n: usize) -> Result<PolygonalKnot> {
        let verts = (0..n)
            .map(|i| self.point(2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        PolygonalKnot::new(verts)
    }

    /// Trefoil from first and second harmonics.
    pub fn trefoil() -> Self {
        FourierKnotSpec {
            x: FourierSeries {
                cos: vec![],
                sin: vec![1.0, 2.0],
            },
            y: FourierSeries {
                cos: vec![1.0, -2.0],
                sin: vec![],
            },
            z: FourierSeries {
                cos: vec![],
                sin: vec![0.0, 0.0, -1.0],
            },
        }
    }

    /// Figure-eight knot on a torus: ((2 + cos 2t) cos 3t,
    /// (2 + cos 2t) sin 3t, sin 4t) expanded into harmonics.
    pub fn figure_eight() -> Self {
        FourierKnotSpec {
            x: FourierSeries {
                cos: vec![0.5, 0.0, 2.0, 0.0, 0.5],
                sin: vec![],
            },
            y: FourierSeries {
                cos: vec![],
                sin: vec![0.5, 0.0, 2.0, 0.0, 0.5],
            },
            z: FourierSeries {
                cos: vec![],
                sin: vec![0.0, 0.0, 0.0, 1.0],
            },
        }
    }

    /// Parse lines of `axis harmonic cos_coeff sin_coeff`, e.g. `x 2 0 2.0`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = FourierKnotSpec::default();
        let mut any = false;
        for (ln, line) in payload_lines(text) {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(parse_err(ln, "expected: axis harmonic cos sin"));
            }
            let series = match f[0] {
                "x" | "X" => &mut spec.x,
                "y" | "Y" => &mut spec.y,
                "z" | "Z" => &mut spec.z,
                other => return Err(parse_err(ln, format!("unknown axis {other:?}"))),
            };
            let j: usize = f[1]
                .parse()
                .map_err(|_| parse_err(ln, format!("bad harmonic {:?}", f[1])))?;
            if j == 0 {
                return Err(parse_err(ln, "harmonics start at 1"));
            }
            let a: f64 = f[2]
                .parse()
                .map_err(|_| parse_err(ln, format!("bad coefficient {:?}", f[2])))?;
            let b: f64 = f[3]
                .parse()
                .map_err(|_| parse_err(ln, format!("bad coefficient {:?}", f[3])))?;
            if series.cos.len() < j {
                series.cos.resize(j, 0.0);
                series.sin.resize(j, 0.0);
            }
            series.cos[j - 1] = a;
            series.sin[j - 1] = b;
            any = true;
        }
        if !any {
            return Err(parse_err(0, "no coefficients in input"));
        }
        Ok(spec)
    }
}

/// A closed chain of `rings` circular loops whose planes alternate, each
/// linking its two neighbours once, sized so the straight-tube thickness of
/// the start configuration exceeds 1.
pub fn make_hopf_chain(rings: usize, segments: usize) -> Result<Link> {
    if rings < 4 || rings % 2 != 0 {
        return Err(Error::InvalidKnot(
            "a closed alternating chain needs an even number of rings, at least 4".into(),
        ));
    }
    if segments < 8 {
        return Err(Error::InvalidKnot("need at least 8 segments per ring".into()));
    }
    // Rings tilt alternately +-55 degrees out of the necklace plane, which
    // clears neighbours far better than the upright/flat alternation; the
    // whole chain is then rescaled to thickness 1.05.
    let rho = 4.0;
    let master = 1.12 * rho / (2.0 * (std::f64::consts::PI / rings as f64).sin());
    let tilt = 55f64.to_radians();
    let mut comps = Vec::with_capacity(rings);
    for k in 0..rings {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / rings as f64;
        let center = Point3::new(master * phi.cos(), master * phi.sin(), 0.0);
        let tangent = Point3::new(-phi.sin(), phi.cos(), 0.0);
        let radial = Point3::new(phi.cos(), phi.sin(), 0.0);
        let g = tilt * if k % 2 == 0 { 1.0 } else { -1.0 };
        let other = radial * g.cos() + Point3::new(0.0, 0.0, 1.0) * g.sin();
        let verts = (0..segments)
            .map(|i| {
                let psi = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
                center + tangent * (rho * psi.cos()) + other * (rho * psi.sin())
            })
            .collect();
        comps.push(PolygonalKnot::new(verts)?);
    }
    let link = Link::new(comps)?;
    let t = crate::geom::thickness(&link).thickness;
    Ok(link.scaled_about(link.centroid(), 1.05 / t))
}

/// A rectangular table of strings with named columns, stored as
/// tab-separated text. Used for batch results and analysis input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RecordTable {
    pub fn new(columns: Vec<String>) -> Self {
        RecordTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::DegenerateSample(format!("no column {name:?}")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[idx].parse::<f64>().map_err(|_| {
                    parse_err(r + 2, format!("bad number {:?} in column {name:?}", row[idx]))
                })
            })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty table"))?;
        let columns: Vec<String> = header.split('\t').map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (ln, line) in lines {
            let row: Vec<String> = line.split('\t').map(|s| s.to_string()).collect();
            if row.len() != columns.len() {
                // Tolerate a truncated final row from an interrupted append.
                if ln == text.lines().count() - 1 {
                    continue;
                }
                return Err(parse_err(
                    ln + 1,
                    format!("row has {} fields, header has {}", row.len(), columns.len()),
                ));
            }
            rows.push(row);
        }
        Ok(RecordTable { columns, rows })
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_tsv())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_tsv(&fs::read_to_string(path)?)
    }
}

/// FNV-1a hash, used to fingerprint a batch configuration so stale results
/// are not reused after the configuration changes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// One unit of batch work: a label, the input it names, and optional
/// topology metadata carried through to the output table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchJob {
    pub label: String,
    pub input: PathBuf,
    pub crossing_number: Option<u32>,
    pub alternating: Option<bool>,
}

/// Manifest format: one `label path [crossing_number alternating]` row per
/// line, `#` comments allowed. The alternating flag reads 1/0, true/false,
/// or a/n.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<BatchJob>> {
    let text = fs::read_to_string(&path)?;
    let mut jobs = Vec::new();
    for (ln, line) in payload_lines(&text) {
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let job = match tokens.as_slice() {
            [l, p] => BatchJob {
                label: l.to_string(),
                input: PathBuf::from(p),
                crossing_number: None,
                alternating: None,
            },
            [l, p, c, a] => BatchJob {
                label: l.to_string(),
                input: PathBuf::from(p),
                crossing_number: Some(
                    c.parse()
                        .map_err(|_| parse_err(ln, format!("bad crossing number {c:?}")))?,
                ),
                alternating: Some(match a.to_ascii_lowercase().as_str() {
                    "1" | "true" | "a" => true,
                    "0" | "false" | "n" => false,
                    _ => return Err(parse_err(ln, format!("bad alternating flag {a:?}"))),
                }),
            },
            _ => return Err(parse_err(ln, "expected: label path [crossing alternating]")),
        };
        jobs.push(job);
    }
    let mut seen = std::collections::HashSet::new();
    for j in &jobs {
        if !seen.insert(&j.label) {
            return Err(Error::InvalidKnot(format!("duplicate label {:?}", j.label)));
        }
    }
    Ok(jobs)
}

/// Run `worker` over every job not already finished in `out_path`, in
/// parallel, appending each result as it lands so an interrupted run can
/// resume. Finished rows are keyed by (label, config hash); the final file
/// is rewritten in manifest order. Failures are isolated per job: the row
/// records the error and the run continues.
pub fn batch_run(
    jobs: &[BatchJob],
    value_columns: &[&str],
    config_hash: u64,
    out_path: impl AsRef<Path>,
    worker: impl Fn(&BatchJob) -> Result<Vec<String>> + Sync,
) -> Result<RecordTable> {
    let out_path = out_path.as_ref();
    let mut columns = vec!["label".to_string(), "config".to_string(), "status".to_string()];
    columns.extend(value_columns.iter().map(|c| c.to_string()));
    let config = format!("{config_hash:016x}");

    // Collect reusable rows from a previous run.
    let mut done: std::collections::HashMap<String, Vec<String>> = std::collections::HashMap::new();
    if out_path.exists() {
        if let Ok(prev) = RecordTable::read_file(out_path) {
            if prev.columns == columns {
                for row in prev.rows {
                    if row[1] == config && row[2] == "ok" {
                        done.insert(row[0].clone(), row);
                    }
                }
            }
        }
    }

    let pending: Vec<&BatchJob> = jobs.iter().filter(|j| !done.contains_key(&j.label)).collect();
    let append = Mutex::new(if pending.is_empty() {
        None
    } else {
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(out_path)?;
        if f.metadata()?.len() == 0 {
            writeln!(f, "{}", columns.join("\t"))?;
        }
        Some(f)
    });

    let n_values = value_columns.len();
    let fresh: Vec<(String, Vec<String>)> = pending
        .par_iter()
        .map(|job| {
            let mut row = vec![job.label.clone(), config.clone()];
            match worker(job) {
                Ok(values) => {
                    assert_eq!(values.len(), n_values, "worker returned wrong arity");
                    row.push("ok".to_string());
                    row.extend(values);
                }
                Err(e) => {
                    row.push(format!("error: {e}"));
                    row.extend(std::iter::repeat(String::new()).take(n_values));
                }
            }
            if let Some(f) = append.lock().unwrap().as_mut() {
                let _ = writeln!(f, "{}", row.join("\t"));
                let _ = f.flush();
            }
            (job.label.clone(), row)
        })
        .collect();
    done.extend(fresh);

    let mut table = RecordTable::new(columns);
    for job in jobs {
        if let Some(row) = done.get(&job.label) {
            table.rows.push(row.clone());
        }
    }
    table.write_file(out_path)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::thickness;
    use crate::invariants::linking_number;
    use crate::testutil::{harmonic_trefoil, TestRng};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn random_link(seed: u64) -> Link {
        let mut rng = TestRng(seed);
        let comps = (0..2)
            .map(|_| {
                let verts = (0..12).map(|_| rng.point() * 3.0).collect();
                PolygonalKnot::new(verts).unwrap()
            })
            .collect();
        Link::new(comps).unwrap()
    }

    #[test]
    fn plain_round_trip_is_bitwise() {
        let link = random_link(9);
        let text = format_link(&link, FileFormat::Plain);
        let back = parse_link(&text).unwrap();
        assert_eq!(link.components.len(), back.components.len());
        for (a, b) in link.components.iter().zip(back.components) {
            assert_eq!(a.vertices(), b.vertices());
        }
    }

    #[test]
    fn vect_round_trip_is_bitwise() {
        let link = random_link(11);
        let text = format_link(&link, FileFormat::Vect);
        assert_eq!(detect_format(&text), FileFormat::Vect);
        let back = parse_link(&text).unwrap();
        for (a, b) in link.components.iter().zip(back.components) {
            assert_eq!(a.vertices(), b.vertices());
        }
    }

    #[test]
    fn vect_accepts_open_polyline_with_repeated_endpoint() {
        let text = "VECT\n1 4 0\n4\n0\n0 0 0\n1 0 0\n0 1 0\n0 0 0\n";
        let link = parse_link(text).unwrap();
        assert_eq!(link.components[0].len(), 3);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "0 0 0\n1 0 zero\n0 1 0\n";
        match parse_link(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a triangle\n0 0 0\n1 0 0 # inline\n0 1 0\n\n\n";
        let link = parse_link(text).unwrap();
        assert_eq!(link.components.len(), 1);
        assert_eq!(link.components[0].len(), 3);
    }

    #[test]
    fn fourier_trefoil_matches_direct_formula() {
        let spec = FourierKnotSpec::trefoil();
        let k = spec.sample(64).unwrap();
        let direct = harmonic_trefoil(64);
        for (a, b) in k.vertices().iter().zip(direct.vertices()) {
            assert!((*a - *b).norm() < 1e-14);
        }
    }

    #[test]
    fn fourier_parse_round_trip() {
        let text = "# trefoil\nx 1 0 1\nx 2 0 2\ny 1 1 0\ny 2 -2 0\nz 3 0 -1\n";
        let spec = FourierKnotSpec::parse(text).unwrap();
        // Zero-padding differs; the sampled curves must agree exactly.
        assert_eq!(
            spec.sample(64).unwrap().vertices(),
            FourierKnotSpec::trefoil().sample(64).unwrap().vertices()
        );
        assert!(FourierKnotSpec::parse("x 0 1 1\n").is_err());
        assert!(FourierKnotSpec::parse("w 1 1 1\n").is_err());
    }

    #[test]
    fn hopf_chain_links_neighbours_once() {
        let chain = make_hopf_chain(6, 20).unwrap();
        assert_eq!(chain.components.len(), 6);
        for i in 0..6 {
            for j in (i + 1)..6 {
                let lk = linking_number(&chain.components[i], &chain.components[j]);
                let expect = if j - i == 1 || j - i == 5 { 1.0 } else { 0.0 };
                assert!(
                    (lk.abs() - expect).abs() < 1e-6,
                    "rings {i},{j}: lk = {lk}"
                );
            }
        }
        let t = thickness(&chain).thickness;
        assert!(t > 1.0, "initial thickness {t} not > 1");
    }

    #[test]
    fn record_table_round_trip() {
        let mut t = RecordTable::new(vec!["label".into(), "value".into()]);
        t.rows.push(vec!["a".into(), "1.5".into()]);
        t.rows.push(vec!["b".into(), "-2".into()]);
        let back = RecordTable::parse_tsv(&t.to_tsv()).unwrap();
        assert_eq!(t, back);
        assert_eq!(back.column_f64("value").unwrap(), vec![1.5, -2.0]);
        assert!(back.column_f64("missing").is_err());
    }

    #[test]
    fn batch_run_is_resumable_and_isolates_failures() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results.tsv");
        let jobs: Vec<BatchJob> = ["a", "b", "c"]
            .iter()
            .map(|l| BatchJob {
                label: l.to_string(),
                input: PathBuf::from(format!("{l}.txt")),
                crossing_number: None,
                alternating: None,
            })
            .collect();
        let calls = AtomicUsize::new(0);
        let worker = |job: &BatchJob| -> Result<Vec<String>> {
            calls.fetch_add(1, Ordering::SeqCst);
            if job.label == "b" {
                return Err(Error::InvalidKnot("boom".into()));
            }
            Ok(vec![format!("{}", job.label.len())])
        };
        let table = batch_run(&jobs, &["len"], 7, &out, worker).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 3);
        assert_eq!(table.rows.len(), 3);
        assert_eq!(table.rows[0][0], "a");
        assert_eq!(table.rows[1][2], "error: invalid knot: boom");
        assert_eq!(table.rows[2][2], "ok");

        // Second run with the same config reruns only the failed job.
        calls.store(0, Ordering::SeqCst);
        let table2 = batch_run(&jobs, &["len"], 7, &out, worker).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 1);
        assert_eq!(table2.rows[0], table.rows[0]);

        // A config change invalidates everything.
        calls.store(0, Ordering::SeqCst);
        batch_run(&jobs, &["len"], 8, &out, worker).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn manifest_rejects_duplicates_and_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        fs::write(&p, "# jobs\na one.txt\nb two.txt 12 n\n").unwrap();
        let jobs = read_manifest(&p).unwrap();
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[1].label, "b");
        assert_eq!(jobs[0].crossing_number, None);
        assert_eq!(jobs[1].crossing_number, Some(12));
        assert_eq!(jobs[1].alternating, Some(false));

        fs::write(&p, "a one.txt\na two.txt\n").unwrap();
        assert!(read_manifest(&p).is_err());
        fs::write(&p, "only-label\n").unwrap();
        assert!(read_manifest(&p).is_err());
        fs::write(&p, "a one.txt 12\n").unwrap();
        assert!(read_manifest(&p).is_err());
        fs::write(&p, "a one.txt twelve a\n").unwrap();
        assert!(read_manifest(&p).is_err());
    }
}
