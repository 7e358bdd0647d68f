use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::bounds::BoundRow;
use super::experiment::TrialRecord;
use crate::error::{Error, Result};

pub const TRIAL_COLUMNS: [&str; 11] = [
    "seed",
    "feasible_star",
    "err_l1",
    "err_l2",
    "err_L1_pop",
    "err_L2_pop",
    "err_L2_emp",
    "exact_recovery",
    "support_recovered",
    "epsilon_used",
    "runtime_ms",
];

pub const BOUND_COLUMNS: [&str; 5] = ["suite", "bound_id", "lhs", "rhs", "holds"];

/// Row-by-row CSV writer that flushes after every row.
pub struct RowWriter<W: Write, T> {
    inner: csv::Writer<W>,
    _row: std::marker::PhantomData<T>,
}

pub type TrialsWriter<W> = RowWriter<W, TrialRecord>;
pub type BoundsWriter<W> = RowWriter<W, BoundRow>;

impl<W: Write, T: Serialize> RowWriter<W, T> {
    /// Writes the header immediately so an empty run still yields a valid file.
    pub fn new(out: W, header: &[&str]) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner.write_record(header)?;
        inner.flush()?;
        Ok(RowWriter {
            inner,
            _row: std::marker::PhantomData,
        })
    }

    pub fn write(&mut self, row: &T) -> Result<()> {
        self.inner.serialize(row)?;
        self.inner.flush()?;
        Ok(())
    }
}

impl<W: Write> TrialsWriter<W> {
    pub fn trials(out: W) -> Result<Self> {
        Self::new(out, &TRIAL_COLUMNS)
    }
}

impl<W: Write> BoundsWriter<W> {
    pub fn bounds(out: W) -> Result<Self> {
        Self::new(out, &BOUND_COLUMNS)
    }
}

pub fn write_trials_csv<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = TrialsWriter::trials(out)?;
    records.iter().try_for_each(|r| w.write(r))
}

pub fn write_bounds_csv<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    let mut w = BoundsWriter::bounds(out)?;
    rows.iter().try_for_each(|r| w.write(r))
}

fn read_rows<R: Read, T: DeserializeOwned>(input: R, columns: &[&str]) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected columns {}", columns.join(",")),
        });
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    read_rows(input, &TRIAL_COLUMNS)
}

pub fn read_bounds_csv<R: Read>(input: R) -> Result<Vec<BoundRow>> {
    read_rows(input, &BOUND_COLUMNS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::BoundSuite;
    use crate::geometry::Bound;

    fn record(seed: u64, l2: Option<f64>) -> TrialRecord {
        TrialRecord {
            seed,
            feasible_star: true,
            err_l1: l2.map(|v| 2.0 * v),
            err_l2: l2,
            err_l1_pop: 0.1,
            err_l2_pop: 0.2,
            err_l2_emp: 0.3,
            exact_recovery: false,
            support_recovered: true,
            epsilon_used: 0.125,
            runtime_ms: 1.5,
        }
    }

    #[test]
    fn trials_round_trip() {
        let rows = vec![record(1, Some(0.1 + 0.2)), record(u64::MAX, None)];
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("seed,feasible_star,err_l1,err_l2,err_L1_pop,err_L2_pop,err_L2_emp,exact_recovery,support_recovered,epsilon_used,runtime_ms\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_trials_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn bounds_round_trip_with_sentinel() {
        let rows = vec![
            BoundRow {
                suite: BoundSuite::Thm2,
                bound_id: "l2".into(),
                lhs: 0.5,
                rhs: Bound::Finite(3.0),
                holds: true,
            },
            BoundRow {
                suite: BoundSuite::Example2,
                bound_id: "L2_sq".into(),
                lhs: 0.5,
                rhs: Bound::Unbounded,
                holds: true,
            },
        ];
        let mut buf = Vec::new();
        write_bounds_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("example2,L2_sq,0.5,unbounded,true"));
        assert_eq!(read_bounds_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = "suite,bound_id,lhs,rhs,holds\nthm1,l1,0.1,1.0,true\nthm1,l1,abc,1.0,true\n";
        match read_bounds_csv(text.as_bytes()) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_bounds_csv("a,b\n".as_bytes()), Err(Error::Csv { line: 1, .. })));
    }
}
