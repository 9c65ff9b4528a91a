//! Feature/target rows built from analytical statistics, the 40/40/20 split
//! and the CSV dataset format.
//!
//! CSV layout: header `alpha0,alpha1,beta1,f1,f2,f3,kind`, one row per
//! parameter triple, floats written with 17 significant digits.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::{autocov_hat, gamma4_closed, raw_even_moments, second_moment, GarchParams};
use crate::param_space::FeatureSetKind;

pub const CSV_HEADER: [&str; 7] = ["alpha0", "alpha1", "beta1", "f1", "f2", "f3", "kind"];

/// One training example: `(E(x^2), Gamma_4, third statistic) -> alpha1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub features: [f64; 3],
    pub target_alpha1: f64,
    pub source_params: GarchParams,
    pub kind: FeatureSetKind,
}

/// The analytical feature triple for `p` under `kind`.
pub fn features_for(p: &GarchParams, kind: FeatureSetKind) -> Result<[f64; 3]> {
    let sigma2 = second_moment(p);
    let gamma4 = gamma4_closed(p.alpha1(), p.beta1())?;
    let third = match kind {
        FeatureSetKind::AutocovLag(n) => autocov_hat(p.alpha1(), p.beta1(), n)?,
        _ => {
            let m = kind.required_moment();
            let raw = raw_even_moments(p, m)?;
            raw[m.get() as usize] / raw[1].powi(m.get() as i32)
        }
    };
    Ok([sigma2, gamma4, third])
}

pub fn build_row(p: &GarchParams, kind: FeatureSetKind) -> Result<FeatureVector> {
    Ok(FeatureVector {
        features: features_for(p, kind)?,
        target_alpha1: p.alpha1(),
        source_params: *p,
        kind,
    })
}

/// Row order follows `params`.
pub fn build_rows(params: &[GarchParams], kind: FeatureSetKind) -> Result<Vec<FeatureVector>> {
    params.par_iter().map(|p| build_row(p, kind)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<FeatureVector>,
    pub test: Vec<FeatureVector>,
    pub validate: Vec<FeatureVector>,
}

/// Partition sizes for a 40/40/20 split of `n` rows. Leftover rows go to the
/// largest fractional remainders; ties favour train, then test.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let weights = [4usize, 4, 2];
    let mut sizes = weights.map(|w| n * w / 10);
    let remainders = weights.map(|w| n * w % 10);
    let mut leftover = n - sizes.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    // stable sort keeps train before test before validate on ties
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]));
    for &i in order.iter().cycle() {
        if leftover == 0 {
            break;
        }
        sizes[i] += 1;
        leftover -= 1;
    }
    (sizes[0], sizes[1], sizes[2])
}

const SPLIT_STREAM: u64 = 1;

/// Seeded uniform shuffle followed by a contiguous 40/40/20 cut.
pub fn split_40_40_20(rows: &[FeatureVector], seed: u64) -> Result<DatasetSplit> {
    if rows.len() < 5 {
        return Err(Error::TooFewRows {
            needed: 5,
            got: rows.len(),
        });
    }
    let mut shuffled = rows.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SPLIT_STREAM);
    shuffled.shuffle(&mut rng);
    let (n_train, n_test, _) = split_sizes(rows.len());
    let validate = shuffled.split_off(n_train + n_test);
    let test = shuffled.split_off(n_train);
    Ok(DatasetSplit {
        train: shuffled,
        test,
        validate,
    })
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[FeatureVector], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::format("csv", e);
    w.write_record(CSV_HEADER).map_err(to_err)?;
    for r in rows {
        let p = r.source_params;
        w.write_record([
            fmt17(p.alpha0()),
            fmt17(p.alpha1()),
            fmt17(p.beta1()),
            fmt17(r.features[0]),
            fmt17(r.features[1]),
            fmt17(r.features[2]),
            r.kind.to_string(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::format("csv", e))?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<FeatureVector>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(|e| Error::format("header", e))?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::format(
            "header",
            format!("expected `{}`, found `{}`", CSV_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::format(format!("line {line}"), e))?;
        let num = |col: usize| -> Result<f64> {
            record[col]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::format(format!("line {line}.{}", CSV_HEADER[col]), e))
        };
        let source_params = GarchParams::new(num(0)?, num(1)?, num(2)?)
            .map_err(|e| Error::format(format!("line {line}.params"), e))?;
        let kind: FeatureSetKind = record[6]
            .parse()
            .map_err(|e| Error::format(format!("line {line}.kind"), e))?;
        rows.push(FeatureVector {
            features: [num(3)?, num(4)?, num(5)?],
            target_alpha1: source_params.alpha1(),
            source_params,
            kind,
        });
    }
    Ok(rows)
}

/// The single kind shared by all rows.
pub fn common_kind(rows: &[FeatureVector]) -> Result<FeatureSetKind> {
    let first = rows.first().ok_or(Error::TooFewRows { needed: 1, got: 0 })?.kind;
    match rows.iter().find(|r| r.kind != first) {
        Some(other) => Err(Error::KindMismatch {
            expected: first.to_string(),
            found: other.kind.to_string(),
        }),
        None => Ok(first),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::gamma6_closed;
    use approx::assert_relative_eq;

    fn p(a0: f64, a1: f64, b1: f64) -> GarchParams {
        GarchParams::new(a0, a1, b1).unwrap()
    }

    #[test]
    fn rows_for_sixth_moment_kind() {
        let rows = build_rows(&[p(1e-4, 0.1, 0.8)], FeatureSetKind::MomentsG6).unwrap();
        let r = &rows[0];
        assert_relative_eq!(r.features[0], 1e-3, max_relative = 1e-14);
        assert_relative_eq!(r.features[1], 3.352_941_176_470_588, max_relative = 1e-14);
        assert_relative_eq!(r.features[2], gamma6_closed(0.1, 0.8).unwrap(), max_relative = 1e-12);
        assert_eq!(r.target_alpha1, 0.1);
    }

    #[test]
    fn rows_at_zero_alpha1_are_gaussian() {
        let rows = build_rows(&[p(1e-4, 0.0, 0.5)], FeatureSetKind::MomentsG6).unwrap();
        assert_relative_eq!(rows[0].features[0], 2e-4, max_relative = 1e-15);
        assert_relative_eq!(rows[0].features[1], 3.0, max_relative = 1e-15);
        assert_relative_eq!(rows[0].features[2], 15.0, max_relative = 1e-13);
        assert_eq!(rows[0].target_alpha1, 0.0);
    }

    #[test]
    fn rows_for_autocov_kind() {
        let rows = build_rows(&[p(1e-4, 0.1, 0.8)], FeatureSetKind::AutocovLag(2)).unwrap();
        assert_relative_eq!(rows[0].features[2], 0.9 * 0.056 / 0.17, max_relative = 1e-14);
    }

    #[test]
    fn build_rows_propagates_divergence() {
        let err = build_rows(&[p(1e-4, 0.41, 0.0)], FeatureSetKind::MomentsG6).unwrap_err();
        assert!(matches!(err, Error::NonFiniteMoment { order: 6 }));
    }

    #[test]
    fn split_sizes_follow_rounding_rule() {
        assert_eq!(split_sizes(125_000), (50_000, 50_000, 25_000));
        assert_eq!(split_sizes(10), (4, 4, 2));
        assert_eq!(split_sizes(11), (5, 4, 2));
        // 4.8 / 4.8 / 2.4 -> remainders favour train, then test
        assert_eq!(split_sizes(12), (5, 5, 2));
        assert_eq!(split_sizes(13), (5, 5, 3));
        assert_eq!(split_sizes(5), (2, 2, 1));
        for n in 5..500 {
            let (a, b, c) = split_sizes(n);
            assert_eq!(a + b + c, n);
            assert!((a as f64 - 0.4 * n as f64).abs() <= 1.0);
            assert!((b as f64 - 0.4 * n as f64).abs() <= 1.0);
            assert!((c as f64 - 0.2 * n as f64).abs() <= 1.0);
        }
    }

    #[test]
    fn split_too_small() {
        let rows = build_rows(&[p(1e-4, 0.1, 0.8); 4], FeatureSetKind::MomentsG6).unwrap();
        assert!(matches!(split_40_40_20(&rows, 1), Err(Error::TooFewRows { needed: 5, got: 4 })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let params = crate::param_space::sample_params(FeatureSetKind::AutocovLag(6), 20, 9).unwrap();
        let rows = build_rows(&params, FeatureSetKind::AutocovLag(6)).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("alpha0,alpha1,beta1,f1,f2,f3,kind\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn csv_errors_name_the_field() {
        let bad = "alpha0,alpha1,beta1,f1,f2,f3,kind\n1e-4,0.1,0.8,1e-3,abc,3.0,g6\n";
        match read_csv(bad.as_bytes()) {
            Err(Error::Format { path, .. }) => assert_eq!(path, "line 2.f2"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_csv("a,b\n1,2\n".as_bytes()), Err(Error::Format { .. })));
    }
}
