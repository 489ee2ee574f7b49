use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{parse_decimal, serde_float, short_string, tolerance, PARAM_PRECISION};

/// The base function before any transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PsiFamily {
    /// `ratio^(-n)`
    Geometric {
        #[serde(with = "serde_float")]
        ratio: Float,
    },
    /// `a * ratio^(-n)`
    ScaledGeometric {
        #[serde(with = "serde_float")]
        a: Float,
        #[serde(with = "serde_float")]
        ratio: Float,
    },
    /// `1 / (n 2^n ln n)`, with the value at `n = 1` set to `1 / (2 ln 2)`.
    Corollary,
    Constant {
        #[serde(with = "serde_float")]
        a: Float,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiTransform {
    /// `min(psi(n), k2 * 2^(-n))`
    Cap(#[serde(with = "serde_float")] Float),
    /// `psi(n) / k`
    Scale(u64),
}

/// An approximation function `psi: N -> [0, inf)` with transforms applied in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiSpec {
    #[serde(flatten)]
    pub family: PsiFamily,
    #[serde(default)]
    pub transforms: Vec<PsiTransform>,
}

impl PsiSpec {
    pub fn new(family: PsiFamily) -> Self {
        Self { family, transforms: Vec::new() }
    }

    pub fn geometric(ratio: u32) -> Self {
        Self::new(PsiFamily::Geometric { ratio: Float::with_val(PARAM_PRECISION, ratio) })
    }

    pub fn corollary() -> Self {
        Self::new(PsiFamily::Corollary)
    }

    pub fn constant(a: &Float) -> Self {
        Self::new(PsiFamily::Constant { a: Float::with_val(PARAM_PRECISION, a) })
    }

    pub fn with_cap(mut self, k2: &Float) -> Self {
        self.transforms.push(PsiTransform::Cap(Float::with_val(PARAM_PRECISION.max(k2.prec()), k2)));
        self
    }

    pub fn with_scale(mut self, k: u64) -> Self {
        self.transforms.push(PsiTransform::Scale(k));
        self
    }

    fn check(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        match &self.family {
            PsiFamily::Geometric { ratio } | PsiFamily::ScaledGeometric { ratio, .. } if *ratio <= 1u32 => {
                return bad(format!("geometric ratio {} must exceed 1", short_string(ratio)));
            }
            PsiFamily::ScaledGeometric { a, .. } if *a <= 0u32 => {
                return bad(format!("scale {} must be positive", short_string(a)));
            }
            PsiFamily::Constant { a } if *a < 0u32 => {
                return bad(format!("constant {} must be non-negative", short_string(a)));
            }
            _ => {}
        }
        for t in &self.transforms {
            match t {
                PsiTransform::Cap(k2) if *k2 <= 0u32 => return bad("cap k2 must be positive".into()),
                PsiTransform::Scale(0) => return bad("scale k must be positive".into()),
                _ => {}
            }
        }
        Ok(())
    }

    /// Ratio `r` when every transformed value is a constant multiple of `r^(-n)`.
    fn geometric_ratio(&self) -> Option<&Float> {
        let ratio = match &self.family {
            PsiFamily::Geometric { ratio } | PsiFamily::ScaledGeometric { ratio, .. } => ratio,
            _ => return None,
        };
        let caps_compatible = self.transforms.iter().all(|t| !matches!(t, PsiTransform::Cap(_))) || *ratio == 2u32;
        caps_compatible.then_some(ratio)
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            PsiFamily::Geometric { ratio } => write!(f, "geometric:{}", short_string(ratio))?,
            PsiFamily::ScaledGeometric { a, ratio } => {
                write!(f, "scaled-geometric:{}:{}", short_string(a), short_string(ratio))?
            }
            PsiFamily::Corollary => f.write_str("corollary")?,
            PsiFamily::Constant { a } => write!(f, "constant:{}", short_string(a))?,
        }
        for t in &self.transforms {
            match t {
                PsiTransform::Cap(k2) => write!(f, "+cap:{}", short_string(k2))?,
                PsiTransform::Scale(k) => write!(f, "+scale:{k}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for PsiSpec {
    type Err = Error;

    /// `geometric:2`, `scaled-geometric:a:r`, `corollary`, `constant:a`,
    /// optionally followed by `+cap:k2` and `+scale:k` in application order.
    fn from_str(text: &str) -> Result<Self> {
        let mut pieces = text.trim().split('+');
        let head = pieces.next().unwrap_or_default();
        let fields: Vec<&str> = head.split(':').map(str::trim).collect();
        let num = |s: &str| parse_decimal(s, PARAM_PRECISION);
        let family = match fields.as_slice() {
            ["geometric", r] => PsiFamily::Geometric { ratio: num(r)? },
            ["scaled-geometric", a, r] => PsiFamily::ScaledGeometric { a: num(a)?, ratio: num(r)? },
            ["corollary"] => PsiFamily::Corollary,
            ["constant", a] => PsiFamily::Constant { a: num(a)? },
            _ => return Err(Error::Parse(format!("unknown psi {head:?}"))),
        };
        let mut spec = PsiSpec::new(family);
        for piece in pieces {
            match piece.trim().split_once(':') {
                Some(("cap", k2)) => spec.transforms.push(PsiTransform::Cap(num(k2)?)),
                Some(("scale", k)) => spec.transforms.push(PsiTransform::Scale(
                    k.trim().parse().map_err(|_| Error::Parse(format!("bad scale {k:?}")))?,
                )),
                _ => return Err(Error::Parse(format!("unknown psi transform {piece:?}"))),
            }
        }
        spec.check()?;
        Ok(spec)
    }
}

/// `psi(n)` at [`PARAM_PRECISION`].
pub fn psi_eval(psi: &PsiSpec, n: u32) -> Float {
    assert!(n >= 1, "psi is defined for n >= 1");
    let prec = PARAM_PRECISION;
    let mut v = match &psi.family {
        PsiFamily::Geometric { ratio } => Float::with_val(prec, ratio.pow(n)).recip(),
        PsiFamily::ScaledGeometric { a, ratio } => Float::with_val(prec, a / Float::with_val(prec, ratio.pow(n))),
        PsiFamily::Corollary => {
            let two_n = Float::with_val(prec, Float::i_exp(1, n as i32));
            let log = if n == 1 { Float::with_val(prec, 2u32).ln() } else { Float::with_val(prec, n).ln() };
            (two_n * n * log).recip()
        }
        PsiFamily::Constant { a } => Float::with_val(prec, a),
    };
    for t in &psi.transforms {
        match t {
            PsiTransform::Cap(k2) => {
                let cap = Float::with_val(prec, k2 >> n);
                if cap < v {
                    v = cap;
                }
            }
            PsiTransform::Scale(k) => v /= *k,
        }
    }
    v
}

/// Smallest integer `C` with `psi(n + m) >= psi(n) / C` for all `n <= n_max`,
/// doubled as a safety factor. Ratio-2 geometric functions get `2^m` exactly.
pub fn decay_constant(psi: &PsiSpec, m: u32, n_max: u32) -> Result<Integer> {
    if m == 0 || n_max == 0 {
        return Err(Error::InvalidArgument("m and n_max must be positive".into()));
    }
    if psi.geometric_ratio().is_some_and(|r| *r == 2u32) {
        return Ok(Integer::from(1) << m);
    }
    let mut worst = Float::new(PARAM_PRECISION);
    let mut current = psi_eval(psi, 1);
    let mut window = std::collections::VecDeque::new();
    for n in 1..=n_max + m {
        let v = if n == 1 { current.clone() } else { psi_eval(psi, n) };
        if v.is_zero() {
            return Err(Error::ZeroPsi(n));
        }
        window.push_back(v);
        if window.len() > m as usize {
            current = window.pop_front().expect("non-empty");
            let ratio = Float::with_val(PARAM_PRECISION, &current / window.back().expect("non-empty"));
            if ratio > worst {
                worst = ratio;
            }
        }
    }
    // Ratios that are integers up to rounding must not round up.
    let shaved = worst * (1u32 - tolerance(PARAM_PRECISION));
    let smallest = shaved.ceil().to_integer().expect("finite ratio").max(Integer::from(1));
    Ok(smallest * 2u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeriesBehaviour {
    DivergentLooking,
    ConvergentLooking,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSum {
    pub n: u32,
    #[serde(with = "serde_float")]
    pub value: Float,
    /// Advisory only.
    pub behaviour: SeriesBehaviour,
}

/// `sum_{n=1}^{N} 2^n psi(n)` with a heuristic tail classification.
///
/// Terms `t_n` are compared against the borderline series `1 / (n ln n)`: the
/// tail looks divergent when the median of `n t_n ln n` over the last quarter of
/// the range is at least 1/2.
pub fn divergence_partial_sum(psi: &PsiSpec, n_max: u32) -> Result<PartialSum> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let mut value = Float::new(PARAM_PRECISION);
    let mut scores = Vec::new();
    let tail_start = n_max - (n_max / 4).max(1) + 1;
    for n in 1..=n_max {
        let term = psi_eval(psi, n) << n;
        if n >= tail_start {
            let ln = (n.max(2) as f64).ln();
            scores.push(term.to_f64() * f64::from(n) * ln);
        }
        value += term;
    }
    scores.sort_by(f64::total_cmp);
    let median = scores[scores.len() / 2];
    let behaviour =
        if median >= 0.5 { SeriesBehaviour::DivergentLooking } else { SeriesBehaviour::ConvergentLooking };
    Ok(PartialSum { n: n_max, value, behaviour })
}
