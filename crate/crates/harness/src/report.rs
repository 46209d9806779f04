//! Aggregated results and their CSV form.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use loolsm_core::contracts::PayoffKind;
use loolsm_core::engine::Estimator;

use crate::error::{HarnessError, Result};

pub const CSV_HEADER: &str =
    "case,key,estimator,M,N,n_mc,mean_offset,std,se_mean,mean_bias,bias_se,flips_total,min_rank,wall_ms";

/// Significant digits of every real in the CSV.
pub const CSV_DIGITS: usize = 10;

/// One estimator on one grid point and set layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub case: PayoffKind,
    pub key: f64,
    pub estimator: Estimator,
    pub m: usize,
    pub n: usize,
    pub n_mc: usize,
    /// Mean price minus the exact price.
    pub mean_offset: f64,
    /// Sample standard deviation of the set prices; `None` for a single set.
    pub std: Option<f64>,
    pub se_mean: Option<f64>,
    /// Mean of `LSM - estimator` over the sets; `None` where it is not defined.
    pub mean_bias: Option<f64>,
    pub bias_se: Option<f64>,
    pub flips_total: Option<usize>,
    pub min_rank: Option<usize>,
    pub wall_ms: u64,
}

impl Record {
    /// `M / N`.
    pub fn ratio(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub records: Vec<Record>,
    /// Bias-versus-`M/N` fits of experiment 2, one per grid point.
    pub slopes: Vec<(f64, SlopeFit)>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn find(&self, key: f64, estimator: Estimator) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.key == key && r.estimator == estimator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopePoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

/// Weighted least-squares line through `points`.
///
/// Weights are inverse variances, so the standard errors are
/// `sqrt(diag((XᵀWX)⁻¹))` without rescaling by the residual.
pub fn fit_bias_slope(points: &[SlopePoint]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(HarnessError::Config(format!("slope fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.w > 0.0 && p.w.is_finite() && p.x.is_finite() && p.y.is_finite())) {
        return Err(HarnessError::Config(format!("invalid slope point {p:?}")));
    }
    let sw: f64 = points.iter().map(|p| p.w).sum();
    let xm = points.iter().map(|p| p.w * p.x).sum::<f64>() / sw;
    let ym = points.iter().map(|p| p.w * p.y).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.w * (p.x - xm).powi(2)).sum();
    if points.iter().all(|p| p.x == points[0].x) || sxx == 0.0 {
        return Err(HarnessError::Config("slope fit: all x values are identical".into()));
    }
    let sxy: f64 = points.iter().map(|p| p.w * (p.x - xm) * (p.y - ym)).sum();
    let syy: f64 = points.iter().map(|p| p.w * (p.y - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let sse: f64 = points.iter().map(|p| p.w * (p.y - slope * p.x - intercept).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(SlopeFit { slope, intercept, r2, slope_se: (1.0 / sxx).sqrt(), intercept_se: (1.0 / sw + xm * xm / sxx).sqrt() })
}

/// Decimal notation with `digits` significant digits and no exponent.
pub fn format_sig(value: f64, digits: usize) -> String {
    if value == 0.0 {
        return "0".into();
    }
    if !value.is_finite() {
        return format!("{value}");
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let mut out = String::from(sign);
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

fn opt_real(v: Option<f64>) -> String {
    v.map(|x| format_sig(x, CSV_DIGITS)).unwrap_or_default()
}

fn opt_int(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in &report.records {
        let row = [
            r.case.name().to_string(),
            format_sig(r.key, CSV_DIGITS),
            r.estimator.name().to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.n_mc.to_string(),
            format_sig(r.mean_offset, CSV_DIGITS),
            opt_real(r.std),
            opt_real(r.se_mean),
            opt_real(r.mean_bias),
            opt_real(r.bias_se),
            opt_int(r.flips_total),
            opt_int(r.min_rank),
            r.wall_ms.to_string(),
        ];
        out.write_all(row.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes `report` to `path`, header first.
pub fn emit_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(report, file).map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv<R: Read>(input: R) -> std::result::Result<Vec<Record>, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(|e| e.to_string())?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(format!("unexpected header `{header}`"));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let at = |msg: String| format!("record {}: {msg}", line + 1);
        let field = |i: usize| row.get(i).unwrap_or("");
        let real = |i: usize| field(i).parse::<f64>().map_err(|e| at(format!("column {i}: {e}")));
        let opt_real = |i: usize| if field(i).is_empty() { Ok(None) } else { real(i).map(Some) };
        let int = |i: usize| field(i).parse::<usize>().map_err(|e| at(format!("column {i}: {e}")));
        let opt_int = |i: usize| if field(i).is_empty() { Ok(None) } else { int(i).map(Some) };
        records.push(Record {
            case: field(0).parse().map_err(|e: loolsm_core::Error| at(e.to_string()))?,
            key: real(1)?,
            estimator: Estimator::parse(field(2)).ok_or_else(|| at(format!("unknown estimator `{}`", field(2))))?,
            m: int(3)?,
            n: int(4)?,
            n_mc: int(5)?,
            mean_offset: real(6)?,
            std: opt_real(7)?,
            se_mean: opt_real(8)?,
            mean_bias: opt_real(9)?,
            bias_se: opt_real(10)?,
            flips_total: opt_int(11)?,
            min_rank: opt_int(12)?,
            wall_ms: field(13).parse().map_err(|e| at(format!("column 13: {e}")))?,
        });
    }
    Ok(records)
}

/// Parses a file written by [`emit_csv`].
pub fn parse_csv(path: &Path) -> Result<Vec<Record>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_csv(file).map_err(|message| HarnessError::Format { path: path.to_path_buf(), message })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(6.585, 10), "6.585000000");
        assert_eq!(format_sig(-0.0024, 10), "-0.002400000000");
        assert_eq!(format_sig(1.0 / 3.0, 10), "0.3333333333");
        assert_eq!(format_sig(123456789012.0, 10), "123456789000");
        assert_eq!(format_sig(9.99999999996, 10), "10.00000000");
        assert_eq!(format_sig(100.0, 10), "100.0000000");
        assert_eq!(format_sig(2.5e-9, 10), "0.000000002500000000");
        assert_eq!(format_sig(0.0, 10), "0");
    }

    #[test]
    fn line_on_y_equals_two_x() {
        let points: Vec<_> = (1..=5).map(|k| SlopePoint { x: k as f64, y: 2.0 * k as f64, w: k as f64 }).collect();
        let fit = fit_bias_slope(&points).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_points() {
        let points: Vec<_> = (1..=4).map(|k| SlopePoint { x: k as f64, y: 0.0, w: 1.0 }).collect();
        let fit = fit_bias_slope(&points).unwrap();
        assert_eq!((fit.slope, fit.intercept), (0.0, 0.0));
    }

    #[test]
    fn weighted_fit_matches_normal_equations() {
        let points = [
            SlopePoint { x: 0.1, y: 1.0, w: 2.0 },
            SlopePoint { x: 0.4, y: 1.9, w: 1.0 },
            SlopePoint { x: 0.5, y: 2.6, w: 0.5 },
            SlopePoint { x: 0.9, y: 3.1, w: 4.0 },
        ];
        let fit = fit_bias_slope(&points).unwrap();
        // (Σw Σwx; Σwx Σwx²) (a b)ᵀ = (Σwy Σwxy)ᵀ
        let s = |f: &dyn Fn(&SlopePoint) -> f64| points.iter().map(|p| p.w * f(p)).sum::<f64>();
        let (a11, a12, a22) = (s(&|_| 1.0), s(&|p| p.x), s(&|p| p.x * p.x));
        let (b1, b2) = (s(&|p| p.y), s(&|p| p.x * p.y));
        let det = a11 * a22 - a12 * a12;
        assert!((fit.intercept - (a22 * b1 - a12 * b2) / det).abs() < 1e-12);
        assert!((fit.slope - (a11 * b2 - a12 * b1) / det).abs() < 1e-12);
        assert!((fit.slope_se - (a11 / det).sqrt()).abs() < 1e-12);
        assert!((fit.intercept_se - (a22 / det).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let same_x: Vec<_> = (0..4).map(|k| SlopePoint { x: 0.5, y: k as f64, w: 1.0 }).collect();
        assert!(fit_bias_slope(&same_x).unwrap_err().to_string().contains("identical"));
        assert!(fit_bias_slope(&same_x[..2]).is_err());
        let zero_w = [
            SlopePoint { x: 0.0, y: 0.0, w: 0.0 },
            SlopePoint { x: 1.0, y: 0.0, w: 1.0 },
            SlopePoint { x: 2.0, y: 0.0, w: 1.0 },
        ];
        assert!(fit_bias_slope(&zero_w).is_err());
    }
}
