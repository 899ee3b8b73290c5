use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::report::write_csv_header;
use crate::{Error, Result};

/// Histogram of gaps between successive events on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Gaps below `lo`.
    pub underflow: u64,
    /// Gaps at or above `hi`.
    pub overflow: u64,
}

impl Histogram {
    /// Empty histogram. `(hi − lo)/bin_width` must be an integer.
    pub fn new(bin_width: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(bin_width.is_finite()
            && bin_width > 0.0
            && lo.is_finite()
            && hi.is_finite()
            && hi > lo)
        {
            return Err(Error::invalid("need bin_width > 0 and hi > lo"));
        }
        let ratio = (hi - lo) / bin_width;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "range {} s is not a whole number of {bin_width} s bins",
                hi - lo
            )));
        }
        Ok(Histogram {
            bin_width,
            lo,
            hi,
            counts: vec![0; n as usize],
            underflow: 0,
            overflow: 0,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_lo(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn fill(&mut self, x: f64) {
        if x < self.lo {
            self.underflow += 1;
        } else if x >= self.hi {
            self.overflow += 1;
        } else {
            let k = ((x - self.lo) / self.bin_width) as usize;
            // x just below hi can round into the bin past the end
            let k = k.min(self.counts.len() - 1);
            self.counts[k] += 1;
        }
    }
}

/// Histogram the differences between successive timestamps.
pub fn histogram_interarrivals(
    timestamps: &[f64],
    bin_width: f64,
    lo: f64,
    hi: f64,
) -> Result<Histogram> {
    let mut h = Histogram::new(bin_width, lo, hi)?;
    for w in timestamps.windows(2) {
        let d = w[1] - w[0];
        if !(d > 0.0) {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        h.fill(d);
    }
    Ok(h)
}

/// CSV `bin_lo_s,count`, preceded by comment lines carrying the binning and
/// the out-of-range tallies.
pub fn write_histogram_csv<W: Write>(out: &mut W, h: &Histogram) -> io::Result<()> {
    write_csv_header(out, "bin_lo_s,count")?;
    writeln!(out, "# bin_width_s={:e}", h.bin_width)?;
    writeln!(out, "# range_s={:e},{:e}", h.lo, h.hi)?;
    writeln!(out, "# underflow={} overflow={}", h.underflow, h.overflow)?;
    for (k, c) in h.counts.iter().enumerate() {
        writeln!(out, "{:.12e},{c}", h.bin_lo(k))?;
    }
    Ok(())
}

/// Read a histogram written by [`write_histogram_csv`]. Files without the
/// comment lines are accepted if their bins are evenly spaced.
pub fn read_histogram_csv<R: BufRead>(input: R) -> Result<Histogram> {
    let mut bin_width = None;
    let mut range = None;
    let (mut underflow, mut overflow) = (0, 0);
    let mut los = Vec::new();
    let mut counts = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::invalid(format!("read error: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line == "bin_lo_s,count" {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("bin_width_s=") {
                bin_width = v.parse::<f64>().ok();
            } else if let Some(v) = comment.strip_prefix("range_s=") {
                if let Some((a, b)) = v.split_once(',') {
                    range = a.parse::<f64>().ok().zip(b.parse::<f64>().ok());
                }
            } else if comment.starts_with("underflow=") {
                for part in comment.split_whitespace() {
                    if let Some(v) = part.strip_prefix("underflow=") {
                        underflow = v.parse().unwrap_or(0);
                    } else if let Some(v) = part.strip_prefix("overflow=") {
                        overflow = v.parse().unwrap_or(0);
                    }
                }
            }
            continue;
        }
        let bad = || Error::invalid(format!("line {}: expected `bin_lo_s,count`", idx + 1));
        let (lo, count) = line.split_once(',').ok_or_else(bad)?;
        los.push(lo.trim().parse::<f64>().map_err(|_| bad())?);
        counts.push(count.trim().parse::<u64>().map_err(|_| bad())?);
    }
    if los.is_empty() {
        return Err(Error::invalid("histogram has no bins"));
    }
    let width = match bin_width {
        Some(w) => w,
        None if los.len() >= 2 => (los[los.len() - 1] - los[0]) / (los.len() - 1) as f64,
        None => return Err(Error::invalid("cannot infer bin width from a single bin")),
    };
    let (lo, hi) = range.unwrap_or((los[0], los[0] + width * los.len() as f64));
    let mut h = Histogram::new(width, lo, hi)?;
    if h.n_bins() != counts.len() {
        return Err(Error::invalid(format!(
            "expected {} bins for the stated range, found {}",
            h.n_bins(),
            counts.len()
        )));
    }
    h.counts = counts;
    h.underflow = underflow;
    h.overflow = overflow;
    Ok(h)
}
