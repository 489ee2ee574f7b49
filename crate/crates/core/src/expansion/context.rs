use std::fmt;
use std::sync::{Arc, OnceLock};

use rug::ops::Pow;
use rug::{Assign, Float};

use super::table::LevelSumTable;
use crate::algebraic::GarsiaCertificate;
use crate::error::{Error, Result};
use crate::real::{parse_decimal, short_string, tolerance, DEFAULT_PRECISION};

/// Default cap on visited tree nodes per call.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Default depth of the level-sum table used to finish deep searches.
pub const DEFAULT_TAIL_DEPTH: u32 = 18;

/// A base `beta` in `(1, 2)` at a fixed working precision.
#[derive(Clone)]
pub struct BetaContext {
    pub(crate) beta: Float,
    pub(crate) c: Float,
    pub(crate) precision_bits: u32,
    pub(crate) tau: Float,
    pub(crate) c_plus_tau: Float,
    pub(crate) neg_tau: Float,
    node_budget: u64,
    tail_depth: u32,
    table: Arc<OnceLock<LevelSumTable>>,
}

impl fmt::Debug for BetaContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BetaContext")
            .field("beta", &short_string(&self.beta))
            .field("precision_bits", &self.precision_bits)
            .field("node_budget", &self.node_budget)
            .finish()
    }
}

impl BetaContext {
    pub fn new(beta: &Float, precision_bits: u32) -> Result<Self> {
        if precision_bits < 32 {
            return Err(Error::InvalidArgument(format!("precision {precision_bits} below 32 bits")));
        }
        let beta = Float::with_val(precision_bits, beta);
        if !(beta > 1u32 && beta < 2u32) {
            return Err(Error::InvalidArgument(format!("beta = {} is not in (1, 2)", short_string(&beta))));
        }
        let c = Float::with_val(precision_bits, &beta - 1u32).recip();
        let tau = tolerance(precision_bits);
        let c_plus_tau = Float::with_val(precision_bits, &c + &tau);
        let neg_tau = Float::with_val(precision_bits, -&tau);
        Ok(Self {
            beta,
            c,
            precision_bits,
            tau,
            c_plus_tau,
            neg_tau,
            node_budget: DEFAULT_NODE_BUDGET,
            tail_depth: DEFAULT_TAIL_DEPTH,
            table: Arc::default(),
        })
    }

    /// Parses a decimal literal such as `"1.5"`.
    pub fn from_decimal(text: &str, precision_bits: u32) -> Result<Self> {
        Self::new(&parse_decimal(text, precision_bits)?, precision_bits)
    }

    pub fn from_certificate(cert: &GarsiaCertificate) -> Result<Self> {
        Self::new(&cert.beta, cert.precision_bits)
    }

    /// `sqrt(2)` at the default precision; handy in examples and tests.
    pub fn sqrt2() -> Self {
        Self::new(&Float::with_val(DEFAULT_PRECISION, 2u32).sqrt(), DEFAULT_PRECISION).expect("sqrt 2 in range")
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    /// Depth of the level-sum table; 0 disables it.
    pub fn with_tail_depth(mut self, depth: u32) -> Self {
        assert!(depth <= 24, "tail depth {depth} too large");
        self.tail_depth = depth;
        self.table = Arc::default();
        self
    }

    pub fn beta(&self) -> &Float {
        &self.beta
    }

    /// Right endpoint `1/(beta - 1)` of the interval of representable points.
    pub fn c(&self) -> &Float {
        &self.c
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Boundary tolerance `2^(-precision/2)`.
    pub fn tolerance(&self) -> &Float {
        &self.tau
    }

    pub fn node_budget(&self) -> u64 {
        self.node_budget
    }

    pub fn tail_depth(&self) -> u32 {
        self.tail_depth
    }

    /// `beta^k` at working precision.
    pub fn beta_pow(&self, k: u32) -> Float {
        Float::with_val(self.precision_bits, (&self.beta).pow(k))
    }

    pub(crate) fn level_table(&self) -> Option<&LevelSumTable> {
        (self.tail_depth > 0).then(|| self.table.get_or_init(|| LevelSumTable::build(self, self.tail_depth)))
    }

    pub(crate) fn check_domain(&self, x: &Float) -> Result<()> {
        if *x < self.neg_tau || *x > self.c_plus_tau || x.is_nan() {
            return Err(Error::Domain { x: short_string(x), c: short_string(&self.c) });
        }
        Ok(())
    }

    /// `x` rounded to working precision and clamped into `[0, c]` after a domain check.
    pub(crate) fn start(&self, x: &Float) -> Result<Float> {
        let x = Float::with_val(self.precision_bits, x);
        self.check_domain(&x)?;
        Ok(self.clamp(x))
    }

    /// Clamps into `[0, c]`.
    pub fn clamp(&self, mut y: Float) -> Float {
        if y.is_sign_negative() {
            y.assign(0u32);
        } else if y > self.c {
            y.assign(&self.c);
        }
        y
    }
}
