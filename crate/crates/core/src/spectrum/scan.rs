use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{certified, low_spectrum, NumericParams, CERTIFICATE_EXTRA};
use crate::error::{Error, Result};

/// Relative abscissa tolerance of the gap minimization.
const BRENT_TOL: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub eps: f64,
    pub delta: f64,
    pub g_min: f64,
    pub g_max: f64,
    /// Grid intervals; the grid has `steps + 1` points.
    pub steps: usize,
    /// Fock truncation.
    pub n: usize,
    /// Number of lowest levels tracked.
    pub levels: usize,
}

impl ScanConfig {
    pub fn new(eps: f64, delta: f64, g_min: f64, g_max: f64) -> Self {
        Self { eps, delta, g_min, g_max, steps: 400, n: 60, levels: 8 }
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = (self.g_max - self.g_min) / self.steps as f64;
        (0..=self.steps).map(|i| self.g_min + h * i as f64).collect()
    }

    fn params(&self, g: f64) -> NumericParams {
        NumericParams::new(g, self.delta, self.eps)
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.levels < 2 {
            return Err(Error::InvalidInput("a scan needs at least one step and two levels".into()));
        }
        if !(self.g_min.is_finite() && self.g_max.is_finite() && self.g_min < self.g_max) {
            return Err(Error::InvalidInput(format!("empty coupling range [{}, {}]", self.g_min, self.g_max)));
        }
        if self.levels > 2 * (self.n + 1) {
            return Err(Error::InvalidInput(format!("{} levels exceed the truncated dimension", self.levels)));
        }
        Ok(())
    }
}

/// Smallest gap between levels `lower` and `lower + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairGap {
    pub lower: usize,
    pub grid_g: f64,
    pub grid_gap: f64,
    pub refined_g: f64,
    pub refined_gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub config: ScanConfig,
    pub grid: Vec<f64>,
    /// `energies[i][k]` is level `k` at `grid[i]`.
    pub energies: Vec<Vec<f64>>,
    pub certified: Vec<Vec<bool>>,
    /// Pairs with at least one certified grid point.
    pub gaps: Vec<PairGap>,
    /// `(grid index, level)` of every level without a certificate.
    pub unconverged: Vec<(usize, usize)>,
}

impl ScanResult {
    /// Smallest refined gap over all pairs.
    pub fn min_gap(&self) -> Option<&PairGap> {
        self.gaps.iter().min_by(|a, b| a.refined_gap.total_cmp(&b.refined_gap))
    }

    /// Pairs whose refined gap is below `threshold`.
    pub fn crossings(&self, threshold: f64) -> Vec<&PairGap> {
        self.gaps.iter().filter(|p| p.refined_gap < threshold).collect()
    }

    /// One row per grid point and level:
    /// `g,eps,delta,level,energy,certified`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["g", "eps", "delta", "level", "energy", "certified"]).map_err(io)?;
        for (i, g) in self.grid.iter().enumerate() {
            for (k, e) in self.energies[i].iter().enumerate() {
                w.write_record([
                    format!("{:.16e}", g),
                    format!("{:.16e}", self.config.eps),
                    format!("{:.16e}", self.config.delta),
                    k.to_string(),
                    format!("{:.16e}", e),
                    self.certified[i][k].to_string(),
                ])
                .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii output"))
    }
}

/// Tracks the lowest levels over a coupling grid and locates the smallest
/// gap of every adjacent pair.
///
/// Each local minimum of a pair's gap on the grid is refined by Brent
/// minimization over the two neighbouring grid intervals.
pub fn crossing_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    cfg.validate()?;
    let grid = cfg.grid();
    let rows: Vec<(Vec<f64>, Vec<bool>)> = grid
        .par_iter()
        .map(|&g| {
            let p = cfg.params(g);
            let lo = low_spectrum(&p, cfg.n, cfg.levels)?;
            let hi = low_spectrum(&p, cfg.n + CERTIFICATE_EXTRA, cfg.levels)?;
            let ok = lo.iter().zip(&hi).map(|(a, b)| certified(*a, *b)).collect();
            Ok((lo, ok))
        })
        .collect::<Result<_>>()?;
    let (energies, certs): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let unconverged = certs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().enumerate().filter(|(_, ok)| !**ok).map(move |(k, _)| (i, k)))
        .collect();

    let mut gaps = Vec::new();
    for k in 0..cfg.levels - 1 {
        let gap: Vec<Option<f64>> = (0..grid.len())
            .map(|i| (certs[i][k] && certs[i][k + 1]).then(|| energies[i][k + 1] - energies[i][k]))
            .collect();
        let mut best: Option<PairGap> = None;
        for i in local_minima(&gap) {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(grid.len() - 1)];
            let f = |g: f64| pair_gap(cfg, g, k);
            let (mut rg, mut rv) = brent_minimize(f, a, b, BRENT_TOL)?;
            let gv = gap[i].unwrap();
            if gv < rv {
                rg = grid[i];
                rv = gv;
            }
            if best.as_ref().is_none_or(|p| rv < p.refined_gap) {
                best = Some(PairGap { lower: k, grid_g: grid[i], grid_gap: gv, refined_g: rg, refined_gap: rv });
            }
        }
        if let Some(mut b) = best {
            let (gi, gv) = gap
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (i, v)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            b.grid_g = grid[gi];
            b.grid_gap = gv;
            gaps.push(b);
        }
    }
    Ok(ScanResult { config: cfg.clone(), grid, energies, certified: certs, gaps, unconverged })
}

fn pair_gap(cfg: &ScanConfig, g: f64, k: usize) -> Result<f64> {
    let e = low_spectrum(&cfg.params(g), cfg.n, k + 2)?;
    Ok(e[k + 1] - e[k])
}

/// Indices that are no larger than their defined neighbours.
fn local_minima(v: &[Option<f64>]) -> Vec<usize> {
    (0..v.len())
        .filter(|&i| {
            let Some(x) = v[i] else { return false };
            let left = i.checked_sub(1).and_then(|j| v[j]);
            let right = v.get(i + 1).copied().flatten();
            left.is_none_or(|l| x <= l) && right.is_none_or(|r| x <= r)
        })
        .collect()
}

/// Brent's parabolic/golden-section minimization on `[a, b]`.
fn brent_minimize(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    const ZEPS: f64 = 1e-18;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + ZEPS;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_smooth_and_kinked_minima() {
        let (x, fx) = brent_minimize(|x| Ok((x - 0.3f64).powi(2) + 1.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-7 && (fx - 1.0).abs() < 1e-14);
        let (x, fx) = brent_minimize(|x| Ok(2.0 * (x - 0.123_456_789f64).abs()), 0.1, 0.2, 1e-13).unwrap();
        assert!((x - 0.123_456_789).abs() < 1e-11 && fx < 1e-11);
    }

    #[test]
    fn local_minima_skip_gaps() {
        let v = [Some(3.0), Some(1.0), Some(2.0), None, Some(0.5), Some(0.7)];
        assert_eq!(local_minima(&v), vec![1, 4]);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ScanConfig::new(0.5, 0.7, 1.0, 0.5);
        assert!(crossing_scan(&c).is_err());
        c.g_max = 2.0;
        c.steps = 0;
        assert!(crossing_scan(&c).is_err());
    }

    #[test]
    fn decoupled_crossing_is_exact() {
        // at g = 0, ε = 0 the levels are k ± Δ; Δ = 0.5 makes 0 + Δ meet 1 - Δ
        let mut c = ScanConfig::new(0.0, 0.5, 0.0, 0.2);
        c.steps = 20;
        c.n = 20;
        c.levels = 3;
        let r = crossing_scan(&c).unwrap();
        assert!(r.unconverged.is_empty());
        assert!(r.gaps[1].refined_gap < 1e-12);
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("g,eps,delta,level,energy,certified\n"));
        assert_eq!(csv.lines().count(), 1 + 21 * 3);
    }
}
