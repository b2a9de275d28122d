//! Per-separation ensemble statistics, chord lengths and cross ratios on a
//! ring, and power-law fits in log-log space.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::write_atomic;
use crate::ensemble::{Observable, Row};
use crate::error::{Error, Result};

/// Statistics of one observable at one separation (and layer, for
/// time-resolved data).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub observable: Observable,
    pub x: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_total)`.
    pub stderr: f64,
    pub n_total: usize,
    /// Rows with a strictly positive value.
    pub n_positive: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<usize>,
}

/// Neumaier-compensated sum.
fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Statistics of a bag of values. The values are sorted first, so the
/// result does not depend on the order rows arrived in.
pub fn summarize(
    observable: Observable,
    x: usize,
    layer: Option<usize>,
    values: &mut [f64],
) -> Result<SeriesPoint> {
    if values.is_empty() {
        return Err(Error::NoRows {
            observable: observable.to_string(),
            x,
        });
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    let stderr = if n > 1 {
        let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(SeriesPoint {
        observable,
        x,
        mean,
        stderr,
        n_total: n,
        n_positive: values.iter().filter(|&&v| v > 0.0).count(),
        layer,
    })
}

/// Final-state statistics of `observable` at separation `x`.
pub fn aggregate(rows: &[Row], observable: Observable, x: usize) -> Result<SeriesPoint> {
    let mut values: Vec<f64> = rows
        .iter()
        .filter(|r| r.observable == observable && r.meta.x == x && r.meta.layer.is_none())
        .map(|r| r.value)
        .collect();
    summarize(observable, x, None, &mut values)
}

/// Every (observable, layer, x) group present in `rows`, sorted by
/// observable, then layer, then separation.
pub fn aggregate_all(rows: &[Row]) -> Vec<SeriesPoint> {
    let mut groups: BTreeMap<(Observable, Option<usize>, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.observable, r.meta.layer, r.meta.x))
            .or_default()
            .push(r.value);
    }
    groups
        .into_iter()
        .map(|((o, layer, x), mut v)| summarize(o, x, layer, &mut v).expect("groups are non-empty"))
        .collect()
}

const CSV_HEADER: &str = "observable,x,mean,stderr,n_total,n_positive";

/// CSV text of a series; a trailing `layer` column appears only for
/// time-resolved data. Floats use the shortest round-trip form.
pub fn series_csv(points: &[SeriesPoint]) -> String {
    let layered = points.iter().any(|p| p.layer.is_some());
    let mut out = String::from(CSV_HEADER);
    if layered {
        out.push_str(",layer");
    }
    out.push('\n');
    for p in points {
        let _ = write!(
            out,
            "{},{},{:?},{:?},{},{}",
            p.observable, p.x, p.mean, p.stderr, p.n_total, p.n_positive
        );
        if layered {
            let _ = write!(out, ",{}", p.layer.map_or(String::new(), |l| l.to_string()));
        }
        out.push('\n');
    }
    out
}

pub fn write_series_csv(path: &Path, points: &[SeriesPoint]) -> Result<()> {
    write_atomic(path, series_csv(points).as_bytes())
}

pub fn read_series_csv(path: &Path) -> Result<Vec<SeriesPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series_csv(&text).map_err(|reason| Error::Parse {
        path: path.to_path_buf(),
        reason,
    })
}

fn parse_series_csv(text: &str) -> std::result::Result<Vec<SeriesPoint>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let layered = match header {
        h if h == CSV_HEADER => false,
        h if h == format!("{CSV_HEADER},layer") => true,
        h => return Err(format!("unexpected header {h:?}")),
    };
    let mut out = Vec::new();
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |what: &str| format!("line {}: bad {what}", k + 2);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 + layered as usize {
            return Err(bad("column count"));
        }
        out.push(SeriesPoint {
            observable: f[0].parse().map_err(|_| bad("observable"))?,
            x: f[1].parse().map_err(|_| bad("x"))?,
            mean: f[2].parse().map_err(|_| bad("mean"))?,
            stderr: f[3].parse().map_err(|_| bad("stderr"))?,
            n_total: f[4].parse().map_err(|_| bad("n_total"))?,
            n_positive: f[5].parse().map_err(|_| bad("n_positive"))?,
            layer: match f.get(6) {
                Some(s) if !s.is_empty() => Some(s.parse().map_err(|_| bad("layer"))?),
                _ => None,
            },
        });
    }
    Ok(out)
}

/// Chord length `(N / pi) sin(pi x / N)` between sites `x` apart on a ring
/// of `N` sites.
pub fn chord_length(n_sites: usize, x: usize) -> Result<f64> {
    if x == 0 || x >= n_sites {
        return Err(Error::OutOfRange(format!(
            "chord needs 0 < x < N, got x = {x}, N = {n_sites}"
        )));
    }
    // The shorter arc keeps w(N, x) == w(N, N - x) bit for bit.
    let x = x.min(n_sites - x);
    let n = n_sites as f64;
    Ok(n / PI * (PI * x as f64 / n).sin())
}

/// Cross ratio `w12 w34 / (w13 w24)` of four positions on the dual ring.
pub fn cross_ratio(n_sites: usize, positions: [usize; 4]) -> Result<f64> {
    let w = |a: usize, b: usize| {
        let d = (positions[b] + n_sites - positions[a] % n_sites) % n_sites;
        chord_length(n_sites, d)
    };
    Ok(w(0, 1)? * w(2, 3)? / (w(0, 2)? * w(1, 3)?))
}

/// Cross ratio of two single sites `x` apart, in its reduced form
/// `1 / w(x)^2`.
pub fn single_site_cross_ratio(n_sites: usize, x: usize) -> Result<f64> {
    let w = chord_length(n_sites, x)?;
    Ok(1.0 / (w * w))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    #[default]
    All,
    Even,
    Odd,
}

impl Parity {
    fn admits(self, x: usize) -> bool {
        match self {
            Parity::All => true,
            Parity::Even => x % 2 == 0,
            Parity::Odd => x % 2 == 1,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Parity::All),
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(Error::Config(format!(
                "parity must be all, even or odd, got {s:?}"
            ))),
        }
    }
}

/// Abscissa of the fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitDomain {
    /// `mean ~ x^-alpha`.
    #[default]
    Separation,
    /// `mean ~ eta^alpha`, fitted against `1 / eta = w(x)^2` of the
    /// neighbouring spins of a tuple on a ring.
    InverseCrossRatio,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Drop the largest separation left after the parity filter.
    pub exclude_last: bool,
    pub exclude_x: Vec<usize>,
    pub parity: Parity,
    pub domain: FitDomain,
    /// Ring size; required for the cross-ratio domain.
    pub n_sites: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Parity,
    Requested,
    LastPoint,
    /// Mean zero (no hits); the logarithm is undefined.
    ZeroMean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    pub x: usize,
    pub reason: ExclusionReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub x: usize,
    pub abscissa: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n_total: usize,
}

/// A straight line in log-log space, `log mean = intercept - alpha log u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub alpha: f64,
    pub alpha_err: f64,
    pub intercept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub observable: Observable,
    pub domain: FitDomain,
    pub alpha: f64,
    /// Regression standard error with three or more points; with two
    /// points the residual is zero and the error propagated from the
    /// per-point standard errors is used.
    pub alpha_err: f64,
    /// Error of alpha propagated from the per-point standard errors.
    pub alpha_err_propagated: f64,
    pub intercept: f64,
    /// Fit weighted by inverse variances of `log mean`; absent when a used
    /// point has zero standard error.
    pub weighted: Option<LineFit>,
    pub used: Vec<FitPoint>,
    pub excluded: Vec<Excluded>,
}

impl FitResult {
    /// Model value at abscissa `u`.
    pub fn model(&self, u: f64) -> f64 {
        (self.intercept - self.alpha * u.ln()).exp()
    }
}

fn abscissa(domain: FitDomain, n_sites: Option<usize>, x: usize) -> Result<f64> {
    match domain {
        FitDomain::Separation => Ok(x as f64),
        FitDomain::InverseCrossRatio => {
            let n = n_sites.ok_or_else(|| {
                Error::Config("the cross-ratio domain needs the ring size".into())
            })?;
            Ok(1.0 / single_site_cross_ratio(n, x)?)
        }
    }
}

/// Fits `series` (points of one observable, final state) to a power law.
pub fn fit_power_law(series: &[SeriesPoint], options: &FitOptions) -> Result<FitResult> {
    let observable = match series.first() {
        Some(p) => p.observable,
        None => return Err(Error::InsufficientPoints(0)),
    };
    if series
        .iter()
        .any(|p| p.observable != observable || p.layer != series[0].layer)
    {
        return Err(Error::Config(
            "a fit takes one observable at one layer".into(),
        ));
    }
    let mut pts: Vec<&SeriesPoint> = series.iter().collect();
    pts.sort_by_key(|p| p.x);
    let mut excluded = Vec::new();
    pts.retain(|p| {
        let keep = options.parity.admits(p.x);
        if !keep {
            excluded.push(Excluded {
                x: p.x,
                reason: ExclusionReason::Parity,
            });
        }
        keep
    });
    if options.exclude_last {
        if let Some(p) = pts.pop() {
            excluded.push(Excluded {
                x: p.x,
                reason: ExclusionReason::LastPoint,
            });
        }
    }
    pts.retain(|p| {
        let keep = !options.exclude_x.contains(&p.x);
        if !keep {
            excluded.push(Excluded {
                x: p.x,
                reason: ExclusionReason::Requested,
            });
        }
        keep
    });
    let mut used = Vec::new();
    for p in pts {
        if p.mean == 0.0 {
            log::warn!(
                "{observable} at x = {}: mean is zero (no hits), dropped from the fit",
                p.x
            );
            excluded.push(Excluded {
                x: p.x,
                reason: ExclusionReason::ZeroMean,
            });
            continue;
        }
        if !(p.mean > 0.0) {
            return Err(Error::NonPositiveMean {
                x: p.x as f64,
                mean: p.mean,
            });
        }
        used.push(FitPoint {
            x: p.x,
            abscissa: abscissa(options.domain, options.n_sites, p.x)?,
            mean: p.mean,
            stderr: p.stderr,
            n_total: p.n_total,
        });
    }
    excluded.sort_by_key(|e| e.x);
    if used.len() < 2 {
        return Err(Error::InsufficientPoints(used.len()));
    }

    let u: Vec<f64> = used.iter().map(|p| p.abscissa.ln()).collect();
    let y: Vec<f64> = used.iter().map(|p| p.mean.ln()).collect();
    let sy: Vec<f64> = used.iter().map(|p| p.stderr / p.mean).collect();
    let ones = vec![1.0; u.len()];
    let (slope, intercept, sxx, rss) = weighted_line(&u, &y, &ones);
    let n = u.len();
    let u_mean = compensated_sum(u.iter().copied()) / n as f64;
    let alpha_err_propagated =
        compensated_sum(u.iter().zip(&sy).map(|(ui, s)| ((ui - u_mean) * s).powi(2))).sqrt() / sxx;
    let alpha_err = if n > 2 {
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        alpha_err_propagated
    };
    let weighted = if sy.iter().all(|s| *s > 0.0) {
        let w: Vec<f64> = sy.iter().map(|s| 1.0 / (s * s)).collect();
        let (ws, wi, wsxx, _) = weighted_line(&u, &y, &w);
        Some(LineFit {
            alpha: -ws,
            alpha_err: (1.0 / wsxx).sqrt(),
            intercept: wi,
        })
    } else {
        None
    };
    Ok(FitResult {
        observable,
        domain: options.domain,
        alpha: -slope,
        alpha_err,
        alpha_err_propagated,
        intercept,
        weighted,
        used,
        excluded,
    })
}

/// Weighted least squares `y = a + b u`; returns (b, a, S_uu, weighted RSS).
fn weighted_line(u: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64, f64) {
    let sw = compensated_sum(w.iter().copied());
    let um = compensated_sum(u.iter().zip(w).map(|(a, b)| a * b)) / sw;
    let ym = compensated_sum(y.iter().zip(w).map(|(a, b)| a * b)) / sw;
    let suu = compensated_sum(u.iter().zip(w).map(|(a, b)| b * (a - um) * (a - um)));
    let suy = compensated_sum(
        u.iter()
            .zip(y)
            .zip(w)
            .map(|((a, c), b)| b * (a - um) * (c - ym)),
    );
    let slope = suy / suu;
    let intercept = ym - slope * um;
    let rss = compensated_sum(
        u.iter()
            .zip(y)
            .zip(w)
            .map(|((a, c), b)| b * (c - intercept - slope * a).powi(2)),
    );
    (slope, intercept, suu, rss)
}

/// Two-column text: abscissa and mean of every point of `series`.
pub fn series_plot_data(series: &[SeriesPoint], options: &FitOptions) -> Result<String> {
    let mut out = String::from("# abscissa mean\n");
    for p in series {
        let _ = writeln!(
            out,
            "{:?} {:?}",
            abscissa(options.domain, options.n_sites, p.x)?,
            p.mean
        );
    }
    Ok(out)
}

/// Two-column text: the fitted line over the used abscissae.
pub fn fit_plot_data(fit: &FitResult) -> String {
    let mut out = String::from("# abscissa model\n");
    for p in &fit.used {
        let _ = writeln!(out, "{:?} {:?}", p.abscissa, fit.model(p.abscissa));
    }
    out
}
