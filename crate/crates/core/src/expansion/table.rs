use std::cmp::Ordering;

use rug::Float;

use super::context::BetaContext;
use super::digits::DigitString;

/// All `2^m` level-`m` sums `sum_{i<=m} e_i beta^(-i)`, sorted ascending.
pub struct LevelSumTable {
    depth: u32,
    sums: Vec<Float>,
    approx: Vec<f64>,
    masks: Vec<u32>,
}

impl LevelSumTable {
    /// Panics for `depth > 24`.
    pub fn build(ctx: &BetaContext, depth: u32) -> Self {
        assert!(depth <= 24, "level-sum table depth {depth} too large");
        let prec = ctx.precision_bits;
        let mut sums = vec![Float::new(prec)];
        let mut masks = vec![0u32];
        let mut weight = Float::with_val(prec, 1u32);
        for i in 0..depth {
            weight /= &ctx.beta;
            let len = sums.len();
            for j in 0..len {
                sums.push(Float::with_val(prec, &sums[j] + &weight));
                masks.push(masks[j] | 1 << i);
            }
        }
        let mut entries: Vec<(Float, u32)> = sums.into_iter().zip(masks).collect();
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
        let (sorted, sorted_masks): (Vec<Float>, Vec<u32>) = entries.into_iter().unzip();
        let approx = sorted.iter().map(Float::to_f64).collect();
        Self { depth, sums: sorted, approx, masks: sorted_masks }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// Sorted sums.
    pub fn sums(&self) -> &[Float] {
        &self.sums
    }

    pub fn digits(&self, index: usize) -> DigitString {
        DigitString::from_mask(u64::from(self.masks[index]), self.depth as usize)
    }

    /// Index of the largest sum `<= t`, if any.
    pub fn floor_index(&self, t: &Float) -> Option<usize> {
        let tf = t.to_f64();
        let mut idx = self.approx.partition_point(|&a| a <= tf);
        while idx > 0 {
            if self.sums[idx - 1] <= *t {
                return Some(idx - 1);
            }
            idx -= 1;
        }
        None
    }

    /// Smallest difference between consecutive sorted sums, with the two
    /// adjacent digit strings (lower sum first).
    pub fn min_adjacent_difference(&self) -> Option<(Float, DigitString, DigitString)> {
        let prec = self.sums.first()?.prec();
        let mut best: Option<(Float, usize)> = None;
        for i in 1..self.sums.len() {
            let diff = Float::with_val(prec, &self.sums[i] - &self.sums[i - 1]);
            if best.as_ref().is_none_or(|(b, _)| diff < *b) {
                best = Some((diff, i));
            }
        }
        best.map(|(d, i)| (d, self.digits(i - 1), self.digits(i)))
    }
}
