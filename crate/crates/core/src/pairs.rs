//! CSV files for candidate pairs (`query_id,reference_id,score`) and
//! ground truth (`query_id,reference_id`).

use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, FormatError, Result};
use crate::metrics::GroundTruth;
use crate::search::MatchCandidate;

/// `%.9g`-style formatting: 9 significant digits, trailing zeros dropped.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FormatError::Io(io).into(),
        other => FormatError::Csv {
            line,
            msg: format!("{other:?}"),
        }
        .into(),
    }
}

fn expect_header(rd: &mut csv::Reader<impl Read>, want: &[&str]) -> Result<()> {
    let header = rd.headers().map_err(csv_err)?;
    if header.iter().map(str::trim).ne(want.iter().copied()) {
        return Err(FormatError::Csv {
            line: 1,
            msg: format!("expected header {}", want.join(",")),
        }
        .into());
    }
    Ok(())
}

pub fn write_pairs<W: Write>(candidates: &[MatchCandidate], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["query_id", "reference_id", "score"]).map_err(csv_err)?;
    for c in candidates {
        wr.write_record([c.query_id.as_str(), c.reference_id.as_str(), &format_sig9(c.score)])
            .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a pair list, rejecting duplicate pairs and non-finite or negative
/// scores.
pub fn read_pairs<R: Read>(r: R) -> Result<Vec<MatchCandidate>> {
    let mut rd = csv::Reader::from_reader(r);
    expect_header(&mut rd, &["query_id", "reference_id", "score"])?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(FormatError::Csv {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            }
            .into());
        }
        let score: f64 = rec[2].trim().parse().map_err(|_| FormatError::Csv {
            line,
            msg: format!("bad score {:?}", &rec[2]),
        })?;
        if !score.is_finite() || score < 0.0 {
            return Err(FormatError::Csv {
                line,
                msg: format!("score must be finite and non-negative, got {score}"),
            }
            .into());
        }
        let (q, r) = (rec[0].to_string(), rec[1].to_string());
        if !seen.insert((q.clone(), r.clone())) {
            return Err(Error::DuplicateCandidate(q, r));
        }
        out.push(MatchCandidate::new(q, r, score));
    }
    Ok(out)
}

pub fn write_truth<W: Write>(truth: &GroundTruth, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["query_id", "reference_id"]).map_err(csv_err)?;
    for (q, r) in truth.sorted_pairs() {
        wr.write_record([q, r]).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_truth<R: Read>(r: R) -> Result<GroundTruth> {
    let mut rd = csv::Reader::from_reader(r);
    expect_header(&mut rd, &["query_id", "reference_id"])?;
    let mut pairs = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 2 {
            return Err(FormatError::Csv {
                line: rec.position().map_or(0, |p| p.line()),
                msg: format!("expected 2 fields, found {}", rec.len()),
            }
            .into());
        }
        pairs.push((rec[0].to_string(), rec[1].to_string()));
    }
    GroundTruth::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(std::f64::consts::SQRT_2), "1.41421356");
        assert_eq!(format_sig9(0.123456789123), "0.123456789");
        assert_eq!(format_sig9(9.9999999999), "10");
        assert_eq!(format_sig9(1.5e-7), "1.5e-07");
        assert_eq!(format_sig9(123456789012.0), "1.23456789e+11");
        for x in [0.3, 2.5, 1e-3, 0.0012345678912] {
            let back: f64 = format_sig9(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-8 * x);
        }
    }

    #[test]
    fn pairs_roundtrip_and_errors() {
        let cands = vec![MatchCandidate::new("q,1", "r", 0.25), MatchCandidate::new("q2", "r", 1.0)];
        let mut buf = Vec::new();
        write_pairs(&cands, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("query_id,reference_id,score\n"));
        assert_eq!(read_pairs(&buf[..]).unwrap(), cands);

        let dup = "query_id,reference_id,score\na,b,0.1\na,b,0.2\n";
        assert!(matches!(read_pairs(dup.as_bytes()), Err(Error::DuplicateCandidate(..))));
        let neg = "query_id,reference_id,score\na,b,-0.1\n";
        assert!(read_pairs(neg.as_bytes()).is_err());
        let hdr = "q,r,s\na,b,0.1\n";
        assert!(read_pairs(hdr.as_bytes()).is_err());
    }

    #[test]
    fn truth_roundtrip() {
        let t = GroundTruth::from_pairs([("q2", "r2"), ("q1", "r1")]).unwrap();
        let mut buf = Vec::new();
        write_truth(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "query_id,reference_id\nq1,r1\nq2,r2\n");
        assert_eq!(read_truth(&buf[..]).unwrap(), t);
        let dup = "query_id,reference_id\nq,a\nq,b\n";
        assert!(matches!(read_truth(dup.as_bytes()), Err(Error::DuplicateTruthQuery(_))));
    }
}
