//! Result rows, content fingerprints and CSV emission.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 5] = ["experiment", "param", "metric", "value", "fingerprint"];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    /// Flattened `key=value` pairs joined by `;`.
    pub param: String,
    pub metric: String,
    pub value: f64,
    pub fingerprint: String,
}

/// Git-style blob hash of the canonical config text.
pub fn fingerprint(canonical: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", canonical.len()).as_bytes());
    h.update(canonical.as_bytes());
    hex::encode(h.finalize())
}

/// 17 significant digits, enough for an exact `f64` round trip.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([r.experiment.as_str(), r.param.as_str(), r.metric.as_str(), &format_value(r.value), r.fingerprint.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> CliResult<()> {
    if rows.is_empty() {
        return Err(CliError::Io(std::io::Error::new(std::io::ErrorKind::InvalidInput, "no rows to write")));
    }
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_csv<R: std::io::Read>(input: R) -> CliResult<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let value = rec[3].parse::<f64>().map_err(|_| CliError::Parse(format!("bad value `{}`", &rec[3])))?;
        rows.push(ResultRow { experiment: rec[0].into(), param: rec[1].into(), metric: rec[2].into(), value, fingerprint: rec[4].into() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row(v: f64) -> ResultRow {
        ResultRow { experiment: "e".into(), param: "a=1;kernel=plateau(M=4), ξ=1".into(), metric: "m".into(), value: v, fingerprint: fingerprint("x") }
    }

    #[test]
    fn one_row_two_lines() {
        let mut buf = Vec::new();
        write_csv(&[row(0.5)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
        assert!(text.starts_with("experiment,param,metric,value,fingerprint\n"));
    }

    #[test]
    fn thousand_rows_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rows: Vec<_> = (0..1000).map(|i| row(rng.gen::<f64>() * 10f64.powi(i % 40 - 20))).collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn fingerprint_is_git_blob_sha256() {
        // `printf 'hello\n' | git hash-object --object-format=sha256 --stdin`
        assert_eq!(fingerprint("hello\n"), "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4");
    }
}
