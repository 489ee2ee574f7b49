//! Minimal complex arithmetic over `rug::Float`.

use rug::Float;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn zero(prec: u32) -> Self {
        Self { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn real(prec: u32, value: &Float) -> Self {
        Self { re: Float::with_val(prec, value), im: Float::new(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, other: &Complex) -> Complex {
        let p = self.prec();
        Complex {
            re: Float::with_val(p, &self.re + &other.re),
            im: Float::with_val(p, &self.im + &other.im),
        }
    }

    pub fn sub(&self, other: &Complex) -> Complex {
        let p = self.prec();
        Complex {
            re: Float::with_val(p, &self.re - &other.re),
            im: Float::with_val(p, &self.im - &other.im),
        }
    }

    pub fn mul(&self, other: &Complex) -> Complex {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * &other.re) - Float::with_val(p, &self.im * &other.im);
        let im = Float::with_val(p, &self.re * &other.im) + Float::with_val(p, &self.im * &other.re);
        Complex { re, im }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    /// `None` when dividing by zero.
    pub fn div(&self, other: &Complex) -> Option<Complex> {
        let p = self.prec();
        let den = other.norm_sqr();
        if den.is_zero() {
            return None;
        }
        let re = Float::with_val(p, &self.re * &other.re) + Float::with_val(p, &self.im * &other.im);
        let im = Float::with_val(p, &self.im * &other.re) - Float::with_val(p, &self.re * &other.im);
        Some(Complex { re: re / &den, im: im / &den })
    }

    pub fn recip(&self) -> Option<Complex> {
        let one = Complex::real(self.prec(), &Float::with_val(self.prec(), 1u32));
        one.div(self)
    }

    pub fn conj(&self) -> Complex {
        Complex { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }
}
