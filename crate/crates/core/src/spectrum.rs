//! Nonincreasing singular-value sequences that define Hilbert ellipsoids.
//!
//! A [`Spectrum`] carries the semi-axes `sigma_1 >= sigma_2 >= ... > 0` of the
//! unit ball of `H` against an `L2`-orthonormal basis, together with a working
//! dimension `M`. Analytic kinds describe infinite sequences (the working
//! dimension only bounds the matrices built from them); explicit and
//! hard-truncated spectra are zero beyond `M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// `sigma_k = k^{-alpha}`.
    PowerLaw { alpha: f64 },
    /// `sigma_k = k^{-alpha} (1 + ln k)^{-beta}`.
    PowerLog { alpha: f64, beta: f64 },
    /// `sigma_k = q^k`.
    Geometric { q: f64 },
    /// Finite list; the sequence is zero past its end.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
    m: usize,
    finite: bool,
}

/// Result of a tail-sum evaluation `sum_{k>n} sigma_k^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub value: f64,
    /// True when `value` is the full infinite tail (closed form or finite sequence).
    pub exact: bool,
    /// Upper estimate of the mass missing from `value` when it is a truncated sum.
    pub truncation_bias: f64,
    /// The infinite tail diverges; `value` is the truncated sum only.
    pub divergent: bool,
}

impl Spectrum {
    pub fn new(kind: SpectrumKind, m: usize) -> Result<Self> {
        let finite = matches!(kind, SpectrumKind::Explicit(_));
        let m = match &kind {
            SpectrumKind::Explicit(v) => v.len(),
            _ => m,
        };
        let s = Spectrum { kind, m, finite };
        s.validate()?;
        Ok(s)
    }

    pub fn power_law(alpha: f64, m: usize) -> Result<Self> {
        Self::new(SpectrumKind::PowerLaw { alpha }, m)
    }

    pub fn power_log(alpha: f64, beta: f64, m: usize) -> Result<Self> {
        Self::new(SpectrumKind::PowerLog { alpha, beta }, m)
    }

    pub fn geometric(q: f64, m: usize) -> Result<Self> {
        Self::new(SpectrumKind::Geometric { q }, m)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        Self::new(SpectrumKind::Explicit(values), 0)
    }

    /// Treat the sequence as exactly zero beyond the working dimension.
    pub fn truncated(mut self) -> Self {
        self.finite = true;
        self
    }

    /// Same sequence with a different working dimension. Explicit spectra
    /// keep their length.
    pub fn with_dim(&self, m: usize) -> Result<Self> {
        if let SpectrumKind::Explicit(_) = self.kind {
            return Ok(self.clone());
        }
        let s = Spectrum {
            kind: self.kind.clone(),
            m,
            finite: self.finite,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpectrum(msg.to_string()));
        if self.m == 0 {
            return bad("working dimension M must be positive");
        }
        match &self.kind {
            SpectrumKind::PowerLaw { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                return bad("power_law needs alpha > 0");
            }
            SpectrumKind::PowerLog { alpha, beta } if !(alpha.is_finite() && *alpha > 0.0 && beta.is_finite()) => {
                return bad("power_log needs alpha > 0 and finite beta");
            }
            SpectrumKind::Geometric { q } if !(*q > 0.0 && *q < 1.0) => {
                return bad("geometric needs 0 < q < 1");
            }
            _ => {}
        }
        let vals = self.values();
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("values must be finite and strictly positive up to M");
        }
        if vals.windows(2).any(|w| w[1] > w[0]) {
            return bad("values must be nonincreasing");
        }
        Ok(())
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    /// Working dimension `M`.
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    fn formula(&self, k: usize) -> f64 {
        let kf = k as f64;
        match &self.kind {
            SpectrumKind::PowerLaw { alpha } => kf.powf(-alpha),
            SpectrumKind::PowerLog { alpha, beta } => kf.powf(-alpha) * (1.0 + kf.ln()).powf(-beta),
            SpectrumKind::Geometric { q } => q.powi(k as i32),
            SpectrumKind::Explicit(v) => v[k - 1],
        }
    }

    /// `sigma_k` for `k >= 1`.
    pub fn sigma(&self, k: usize) -> Result<f64> {
        if k == 0 || (self.finite && k > self.m) {
            return Err(Error::OutOfRange { index: k, max: self.m });
        }
        Ok(self.formula(k))
    }

    /// `sigma_k`, reading zero past the end of a finite sequence.
    pub fn sigma_or_zero(&self, k: usize) -> f64 {
        assert!(k >= 1, "spectrum index starts at 1");
        if self.finite && k > self.m {
            0.0
        } else {
            self.formula(k)
        }
    }

    /// `sigma_1, ..., sigma_M`.
    pub fn values(&self) -> Vec<f64> {
        (1..=self.m).map(|k| self.formula(k)).collect()
    }

    /// Whether `sum_k sigma_k^2` converges.
    pub fn is_square_summable(&self) -> bool {
        if self.finite {
            return true;
        }
        match self.kind {
            SpectrumKind::PowerLaw { alpha } => alpha > 0.5,
            SpectrumKind::PowerLog { alpha, beta } => alpha > 0.5 || (alpha == 0.5 && beta > 0.5),
            SpectrumKind::Geometric { .. } => true,
            SpectrumKind::Explicit(_) => true,
        }
    }

    fn truncated_tail(&self, n: usize) -> f64 {
        ((n + 1)..=self.m).map(|k| self.formula(k).powi(2)).sum()
    }

    /// `sum_{k>n} sigma_k^2`, in closed form where one exists.
    ///
    /// Power-log tails are summed up to `M`; the reported bias estimates the
    /// neglected mass as `sigma_{M+1}^2` times an effective residual count.
    pub fn tail_sum(&self, n: usize) -> TailSum {
        if self.finite {
            return TailSum {
                value: self.truncated_tail(n),
                exact: true,
                truncation_bias: 0.0,
                divergent: false,
            };
        }
        match self.kind {
            SpectrumKind::Geometric { q } => {
                let q2 = q * q;
                TailSum {
                    value: q2.powi((n + 1) as i32) / (1.0 - q2),
                    exact: true,
                    truncation_bias: 0.0,
                    divergent: false,
                }
            }
            SpectrumKind::PowerLaw { alpha } if alpha > 0.5 => TailSum {
                value: hurwitz_zeta(2.0 * alpha, (n + 1) as f64),
                exact: true,
                truncation_bias: 0.0,
                divergent: false,
            },
            SpectrumKind::PowerLog { alpha, beta } if self.is_square_summable() => {
                let m1 = (self.m + 1) as f64;
                let residual_count = if alpha > 0.5 {
                    m1 / (2.0 * alpha - 1.0)
                } else {
                    m1 * (1.0 + m1.ln()) / (2.0 * beta - 1.0)
                };
                TailSum {
                    value: self.truncated_tail(n),
                    exact: false,
                    truncation_bias: self.formula(self.m + 1).powi(2) * residual_count,
                    divergent: false,
                }
            }
            _ => TailSum {
                value: self.truncated_tail(n),
                exact: false,
                truncation_bias: f64::INFINITY,
                divergent: true,
            },
        }
    }

    /// `sqrt(tail_sum(n) / n)`, the benchmark rate of iid information.
    pub fn benchmark_bound(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("benchmark bound needs n >= 1".into()));
        }
        let tail = self.tail_sum(n);
        if tail.divergent {
            return Err(Error::DivergentTail);
        }
        Ok((tail.value / n as f64).sqrt())
    }
}

/// Compact text form: `power_law:1`, `power_log:1:0.5`, `geometric:0.5`,
/// `explicit:1,0.5,0.1`.
impl std::fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectrumKind::PowerLaw { alpha } => write!(f, "power_law:{alpha}"),
            SpectrumKind::PowerLog { alpha, beta } => write!(f, "power_log:{alpha}:{beta}"),
            SpectrumKind::Geometric { q } => write!(f, "geometric:{q}"),
            SpectrumKind::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
        }
    }
}

impl std::str::FromStr for SpectrumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad spectrum `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let params: Vec<&str> = rest.split(':').collect();
        match (kind.trim(), params.as_slice()) {
            ("power_law", [a]) => Ok(SpectrumKind::PowerLaw { alpha: num(a)? }),
            ("power_log", [a, b]) => Ok(SpectrumKind::PowerLog {
                alpha: num(a)?,
                beta: num(b)?,
            }),
            ("geometric", [q]) => Ok(SpectrumKind::Geometric { q: num(q)? }),
            ("explicit", [v]) => Ok(SpectrumKind::Explicit(v.split(',').map(num).collect::<Result<_>>()?)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for SpectrumKind {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpectrumKind {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hurwitz zeta `sum_{k>=0} (a + k)^{-s}` for `s > 1`, `a > 0`, by
/// Euler-Maclaurin summation after a short direct prefix.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    // B_{2j} / (2j)!
    const B2J_OVER_FACT: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
    ];
    const DIRECT: usize = 16;
    let mut sum = 0.0;
    for k in 0..DIRECT {
        sum += (a + k as f64).powf(-s);
    }
    let x = a + DIRECT as f64;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times x^{-s-2j+1}
    let mut factor = s * x.powf(-s - 1.0);
    for (j, c) in B2J_OVER_FACT.iter().enumerate() {
        sum += c * factor;
        let p = 2.0 * (j as f64 + 1.0);
        factor *= (s + p - 1.0) * (s + p) / (x * x);
    }
    sum
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectrumJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(rename = "M")]
    m: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    finite: bool,
}

impl Serialize for Spectrum {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut j = SpectrumJson {
            kind: String::new(),
            alpha: None,
            beta: None,
            q: None,
            values: None,
            m: self.m,
            finite: false,
        };
        match &self.kind {
            SpectrumKind::PowerLaw { alpha } => {
                j.kind = "power_law".into();
                j.alpha = Some(*alpha);
                j.finite = self.finite;
            }
            SpectrumKind::PowerLog { alpha, beta } => {
                j.kind = "power_log".into();
                j.alpha = Some(*alpha);
                j.beta = Some(*beta);
                j.finite = self.finite;
            }
            SpectrumKind::Geometric { q } => {
                j.kind = "geometric".into();
                j.q = Some(*q);
                j.finite = self.finite;
            }
            SpectrumKind::Explicit(v) => {
                j.kind = "explicit".into();
                j.values = Some(v.clone());
            }
        }
        j.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SpectrumJson::deserialize(de)?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| D::Error::custom(format!("missing field `{name}`")));
        let kind = match j.kind.as_str() {
            "power_law" => SpectrumKind::PowerLaw { alpha: need(j.alpha, "alpha")? },
            "power_log" => SpectrumKind::PowerLog {
                alpha: need(j.alpha, "alpha")?,
                beta: need(j.beta, "beta")?,
            },
            "geometric" => SpectrumKind::Geometric { q: need(j.q, "q")? },
            "explicit" => SpectrumKind::Explicit(j.values.ok_or_else(|| D::Error::custom("missing field `values`"))?),
            other => return Err(D::Error::custom(format!("unknown spectrum kind `{other}`"))),
        };
        let s = Spectrum::new(kind, j.m).map_err(D::Error::custom)?;
        Ok(if j.finite { s.truncated() } else { s })
    }
}
