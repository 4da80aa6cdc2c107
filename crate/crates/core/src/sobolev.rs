//! Geometry of sampling sets in `[0,1]^d`, `d in {1, 2}`: covering radius
//! and `L_gamma` norms of the distance function `x -> dist(x, P)`.
//!
//! In one dimension both are exact: the distance function is a sawtooth, so
//! every gap contributes a closed-form integral. In two dimensions they are
//! evaluated on a uniform grid whose resolution is reported with the result.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default resolution of the two-dimensional evaluation grid.
pub const DEFAULT_GRID: usize = 512;

/// A nonempty point set in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    /// Flat coordinates, `dim` per point. Sorted when `dim == 1`.
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new_1d(mut xs: Vec<f64>) -> Result<Self> {
        check_coords(&xs)?;
        xs.sort_by(f64::total_cmp);
        Ok(PointSet { dim: 1, coords: xs })
    }

    pub fn new_2d(pts: &[[f64; 2]]) -> Result<Self> {
        let coords: Vec<f64> = pts.iter().flatten().copied().collect();
        check_coords(&coords)?;
        Ok(PointSet { dim: 2, coords })
    }

    /// `n` iid uniform points.
    pub fn uniform<R: Rng + ?Sized>(dim: usize, n: usize, rng: &mut R) -> Result<Self> {
        let coords: Vec<f64> = (0..dim * n).map(|_| rng.random::<f64>()).collect();
        match dim {
            1 => Self::new_1d(coords),
            2 => {
                check_coords(&coords)?;
                Ok(PointSet { dim: 2, coords })
            }
            _ => Err(Error::Unsupported(format!("dimension {dim}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Sorted abscissae of a one-dimensional set.
    pub fn xs(&self) -> Option<&[f64]> {
        (self.dim == 1).then_some(&self.coords[..])
    }

    /// A copy with one more point.
    pub fn with_point(&self, p: &[f64]) -> Result<Self> {
        if p.len() != self.dim {
            return Err(Error::Dimension(format!("point of dimension {} added to a {}-d set", p.len(), self.dim)));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(p);
        if self.dim == 1 {
            Self::new_1d(coords)
        } else {
            check_coords(&coords)?;
            Ok(PointSet { dim: self.dim, coords })
        }
    }

    /// CSV with a header row (`x` or `x,y`) and one point per row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.dim == 1 {
            wr.write_record(["x"])?;
        } else {
            wr.write_record(["x", "y"])?;
        }
        for i in 0..self.len() {
            wr.write_record(self.point(i).iter().map(|v| format!("{v:?}")))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let dim = rd.headers()?.len();
        let mut coords = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(Error::Dimension(format!("row with {} fields, expected {dim}", rec.len())));
            }
            for f in rec.iter() {
                coords.push(f.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad coordinate {f:?}: {e}")))?);
            }
        }
        match dim {
            1 => Self::new_1d(coords),
            2 => {
                check_coords(&coords)?;
                Ok(PointSet { dim: 2, coords })
            }
            _ => Err(Error::Unsupported(format!("dimension {dim}"))),
        }
    }
}

fn check_coords(c: &[f64]) -> Result<()> {
    if c.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if let Some(v) = c.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("coordinate {v} outside [0, 1]")));
    }
    Ok(())
}

/// Exponent of a distance-function norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Finite(f64),
    Infinity,
}

impl std::fmt::Display for Gamma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gamma::Finite(g) => write!(f, "{g}"),
            Gamma::Infinity => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Gamma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(Gamma::Infinity),
            t => match t.parse::<f64>() {
                Ok(g) if g > 0.0 && g.is_finite() => Ok(Gamma::Finite(g)),
                _ => Err(Error::Config(format!("bad exponent {s:?}"))),
            },
        }
    }
}

/// How a geometric quantity was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "exact-1d")]
    Exact1d,
    #[serde(rename = "grid-2d")]
    Grid2d { resolution: usize },
}

/// Largest distance from a point of `[0,1]^d` to `P`.
///
/// Exact in one dimension. In two dimensions the maximum over the nodes
/// `(i, j) / (G - 1)`, a lower bound within one grid diagonal.
pub fn covering_radius(p: &PointSet) -> f64 {
    covering_radius_grid(p, DEFAULT_GRID)
}

pub fn covering_radius_grid(p: &PointSet, grid: usize) -> f64 {
    match p.dim {
        1 => {
            let xs = &p.coords;
            let mut h = xs[0].max(1.0 - xs[xs.len() - 1]);
            for w in xs.windows(2) {
                h = h.max(0.5 * (w[1] - w[0]));
            }
            h
        }
        _ => {
            let nn = NearestGrid::new(p);
            let step = 1.0 / (grid.max(2) - 1) as f64;
            let mut h2: f64 = 0.0;
            for i in 0..grid.max(2) {
                for j in 0..grid.max(2) {
                    h2 = h2.max(nn.dist2(i as f64 * step, j as f64 * step));
                }
            }
            h2.sqrt()
        }
    }
}

/// `(int_{[0,1]^d} dist(x, P)^gamma dx)^{1/gamma}`; `gamma = inf` gives the
/// covering radius.
pub fn dist_norm(p: &PointSet, gamma: Gamma) -> f64 {
    dist_norm_grid(p, gamma, DEFAULT_GRID)
}

pub fn dist_norm_grid(p: &PointSet, gamma: Gamma, grid: usize) -> f64 {
    let g = match gamma {
        Gamma::Infinity => return covering_radius_grid(p, grid),
        Gamma::Finite(g) => g,
    };
    match p.dim {
        1 => {
            let xs = &p.coords;
            // the distance rises linearly from each point; a gap of length
            // `l` between two points contributes `2 (l/2)^{g+1} / (g+1)`
            let edge = |l: f64| l.powf(g + 1.0) / (g + 1.0);
            let mut total = edge(xs[0]) + edge(1.0 - xs[xs.len() - 1]);
            for w in xs.windows(2) {
                total += 2.0 * edge(0.5 * (w[1] - w[0]));
            }
            total.powf(1.0 / g)
        }
        _ => {
            let nn = NearestGrid::new(p);
            let cells = grid.max(1);
            let step = 1.0 / cells as f64;
            let mut total = 0.0;
            for i in 0..cells {
                for j in 0..cells {
                    let d2 = nn.dist2((i as f64 + 0.5) * step, (j as f64 + 0.5) * step);
                    total += d2.powf(0.5 * g);
                }
            }
            (total / (cells * cells) as f64).powf(1.0 / g)
        }
    }
}

/// Bucketed nearest-neighbour search in the unit square.
struct NearestGrid<'a> {
    pts: &'a [f64],
    side: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> NearestGrid<'a> {
    fn new(p: &'a PointSet) -> Self {
        let n = p.len();
        let side = ((n as f64).sqrt().ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); side * side];
        for i in 0..n {
            let (bx, by) = Self::cell(side, p.coords[2 * i], p.coords[2 * i + 1]);
            buckets[by * side + bx].push(i);
        }
        NearestGrid {
            pts: &p.coords,
            side,
            buckets,
        }
    }

    fn cell(side: usize, x: f64, y: f64) -> (usize, usize) {
        let f = |v: f64| ((v * side as f64) as usize).min(side - 1);
        (f(x), f(y))
    }

    /// Squared distance from `(x, y)` to the nearest point.
    fn dist2(&self, x: f64, y: f64) -> f64 {
        let (cx, cy) = Self::cell(self.side, x, y);
        let width = 1.0 / self.side as f64;
        let mut best = f64::INFINITY;
        for r in 0..=self.side {
            // every point outside ring r is at least (r) cell widths away
            if r > 0 {
                let reach = (r - 1) as f64 * width;
                if reach * reach > best {
                    break;
                }
            }
            let (x0, x1) = (cx.saturating_sub(r), (cx + r).min(self.side - 1));
            let (y0, y1) = (cy.saturating_sub(r), (cy + r).min(self.side - 1));
            for by in y0..=y1 {
                for bx in x0..=x1 {
                    let on_ring = bx + r == cx || bx == cx + r || by + r == cy || by == cy + r;
                    if !on_ring {
                        continue;
                    }
                    for &i in &self.buckets[by * self.side + bx] {
                        let dx = self.pts[2 * i] - x;
                        let dy = self.pts[2 * i + 1] - y;
                        best = best.min(dx * dx + dy * dy);
                    }
                }
            }
        }
        best
    }
}

/// Covering radius and distance-function norms of one set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistReport {
    pub covering_radius: f64,
    /// Keyed by the exponent as written (`"1"`, `"2.5"`, `"inf"`).
    pub l_gamma_norms: BTreeMap<String, f64>,
    #[serde(flatten)]
    pub method: Method,
}

pub fn dist_report(p: &PointSet, gammas: &[Gamma], grid: usize) -> DistReport {
    let h = covering_radius_grid(p, grid);
    let mut l_gamma_norms = BTreeMap::new();
    for g in gammas {
        let v = match g {
            Gamma::Infinity => h,
            _ => dist_norm_grid(p, *g, grid),
        };
        l_gamma_norms.insert(g.to_string(), v);
    }
    DistReport {
        covering_radius: h,
        l_gamma_norms,
        method: if p.dim == 1 {
            Method::Exact1d
        } else {
            Method::Grid2d { resolution: grid }
        },
    }
}

/// Order-level proxy for the sampling error of `W^s_p` in `L_q` by the
/// geometry of `P`: `h^{s - d(1/p - 1/q)}` when `q >= p`, otherwise
/// `||dist(., P)||_{L_gamma}^s` with `gamma = s / (1/q - 1/p)`.
///
/// `p` and `q` may be `f64::INFINITY`.
pub fn radius_proxy(pts: &PointSet, s: u32, p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::Domain(format!("need p, q >= 1 (p = {p}, q = {q})")));
    }
    let d = pts.dim as f64;
    let s_f = s as f64;
    let embeds = if p > 1.0 { s_f > d / p } else { s_f >= d };
    if !embeds {
        return Err(Error::Domain(format!("W^{s}_{p} does not embed into C for d = {d}")));
    }
    let inv = |t: f64| if t.is_infinite() { 0.0 } else { 1.0 / t };
    if q >= p {
        let h = covering_radius(pts);
        Ok(h.powf(s_f - d * (inv(p) - inv(q))))
    } else {
        let gamma = s_f / (inv(q) - inv(p));
        Ok(dist_norm(pts, Gamma::Finite(gamma)).powf(s_f))
    }
}
