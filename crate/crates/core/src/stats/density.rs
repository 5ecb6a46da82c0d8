//! Density estimates over a key array: fixed-width histograms and Gaussian
//! kernel density estimates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::StatsError;
use crate::keys::{Key, KeyArray};

/// Kernel mass beyond this many bandwidths is dropped.
const KERNEL_CUTOFF: f64 = 7.0;
/// Grid cells per bandwidth for [`KernelDensity::gridded`].
const GRID_CELLS_PER_BANDWIDTH: f64 = 8.0;
const MAX_GRID_POINTS: usize = 1 << 20;
const MAX_HISTOGRAM_BINS: usize = 1 << 26;

/// Type-7 (linear interpolation) sample quantile of sorted `values`.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Freedman–Diaconis bin width `2 IQR / n^(1/3)`.
///
/// A zero IQR yields [`StatsError::DegenerateIQR`] carrying the fallback
/// width `(x(n) - x(1)) / ceil(sqrt n)`.
pub fn fd_bin_width<K: Key>(keys: &KeyArray<K>) -> Result<f64, StatsError> {
    let n = keys.len();
    if n < 4 {
        return Err(StatsError::TooFewKeys { needed: 4, got: n });
    }
    let values: Vec<f64> = keys.iter().map(|k| k.to_f64()).collect();
    let iqr = quantile_type7(&values, 0.75) - quantile_type7(&values, 0.25);
    if iqr <= 0.0 {
        let span = values[n - 1] - values[0];
        return Err(StatsError::DegenerateIQR {
            fallback: span / libm::ceil(libm::sqrt(n as f64)),
        });
    }
    Ok(2.0 * iqr / libm::cbrt(n as f64))
}

/// Piecewise-constant density on `[origin, origin + bins * width]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    origin: f64,
    width: f64,
    heights: Vec<f64>,
}

impl Histogram {
    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `(left edge, height)` per bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.heights
            .iter()
            .enumerate()
            .map(|(i, &h)| (self.origin + i as f64 * self.width, h))
    }

    pub fn end(&self) -> f64 {
        self.origin + self.heights.len() as f64 * self.width
    }

    /// `Σ width · height`.
    pub fn total_mass(&self) -> f64 {
        self.heights.iter().sum::<f64>() * self.width
    }

    #[inline]
    fn bin_of(&self, x: f64) -> usize {
        let raw = libm::floor((x - self.origin) / self.width);
        if raw <= 0.0 {
            0
        } else {
            (raw as usize).min(self.heights.len() - 1)
        }
    }

    #[inline]
    pub fn density_at(&self, x: f64) -> f64 {
        if !(x >= self.origin && x <= self.end()) {
            return 0.0;
        }
        self.heights[self.bin_of(x)]
    }
}

/// Histogram with bins of `width` starting at `x(1)`; the last bin is padded
/// past `x(n)`. Heights are `count / (n · width)`.
pub fn histogram_density<K: Key>(keys: &KeyArray<K>, width: f64) -> Result<Histogram, StatsError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(StatsError::InvalidWidth(width));
    }
    let origin = keys.first().to_f64();
    let span = keys.last().to_f64() - origin;
    let bins = libm::ceil(span / width).max(1.0);
    if bins > MAX_HISTOGRAM_BINS as f64 {
        return Err(StatsError::InvalidWidth(width));
    }
    let mut hist = Histogram {
        origin,
        width,
        heights: vec![0.0; bins as usize],
    };
    let mut counts = vec![0usize; hist.heights.len()];
    for key in keys.iter() {
        counts[hist.bin_of(key.to_f64())] += 1;
    }
    let scale = 1.0 / (keys.len() as f64 * width);
    for (h, c) in hist.heights.iter_mut().zip(counts) {
        *h = c as f64 * scale;
    }
    Ok(hist)
}

/// Gaussian kernel density estimate over the keys.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDensity {
    sample: Vec<f64>,
    bandwidth: f64,
}

/// Silverman's rule of thumb `1.06 σ̂ n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    1.06 * libm::sqrt(var) * libm::pow(n, -0.2)
}

/// Kernel estimate with the given bandwidth, or Silverman's rule when `None`.
pub fn kde_density<K: Key>(
    keys: &KeyArray<K>,
    bandwidth: Option<f64>,
) -> Result<KernelDensity, StatsError> {
    let n = keys.len();
    if n < 2 {
        return Err(StatsError::TooFewKeys { needed: 2, got: n });
    }
    let sample: Vec<f64> = keys.iter().map(|k| k.to_f64()).collect();
    let bandwidth = bandwidth.unwrap_or_else(|| silverman_bandwidth(&sample));
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(StatsError::InvalidWidth(bandwidth));
    }
    Ok(KernelDensity { sample, bandwidth })
}

#[inline]
fn std_normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * PI)
}

impl KernelDensity {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    /// Support after truncating each kernel at the cutoff.
    pub fn support(&self) -> (f64, f64) {
        let reach = KERNEL_CUTOFF * self.bandwidth;
        (
            self.sample[0] - reach,
            self.sample[self.sample.len() - 1] + reach,
        )
    }

    /// Direct evaluation; touches only sample points within the cutoff.
    pub fn density_at(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let reach = KERNEL_CUTOFF * h;
        let lo = self.sample.partition_point(|&s| s < x - reach);
        let hi = self.sample.partition_point(|&s| s <= x + reach);
        let sum: f64 = self.sample[lo..hi]
            .iter()
            .map(|&s| std_normal_pdf((x - s) / h))
            .sum();
        sum / (self.sample.len() as f64 * h)
    }

    /// Linear-binned approximation evaluated on a regular grid. Evaluation is
    /// `O(1)` per point, which the Monte-Carlo estimator needs at large `n`.
    pub fn gridded(&self) -> GriddedDensity {
        let h = self.bandwidth;
        let (lo, hi) = self.support();
        let mut step = h / GRID_CELLS_PER_BANDWIDTH;
        let mut points = libm::ceil((hi - lo) / step) as usize + 1;
        if points > MAX_GRID_POINTS {
            points = MAX_GRID_POINTS;
            step = (hi - lo) / (points - 1) as f64;
        }

        let mut weights = vec![0.0; points];
        for &s in &self.sample {
            let pos = (s - lo) / step;
            let cell = (libm::floor(pos) as usize).min(points - 2);
            let frac = pos - cell as f64;
            weights[cell] += 1.0 - frac;
            weights[cell + 1] += frac;
        }

        let reach = libm::ceil(KERNEL_CUTOFF * h / step) as usize;
        let norm = 1.0 / (self.sample.len() as f64 * h);
        let kernel: Vec<f64> = (0..=reach)
            .map(|l| std_normal_pdf(l as f64 * step / h) * norm)
            .collect();
        let mut values = vec![0.0; points];
        for (c, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let from = c.saturating_sub(reach);
            let to = (c + reach).min(points - 1);
            for (g, v) in values.iter_mut().enumerate().take(to + 1).skip(from) {
                *v += w * kernel[g.abs_diff(c)];
            }
        }
        GriddedDensity {
            origin: lo,
            step,
            values,
        }
    }
}

/// Density tabulated on a regular grid, linearly interpolated between points.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedDensity {
    origin: f64,
    step: f64,
    values: Vec<f64>,
}

impl GriddedDensity {
    #[inline]
    pub fn density_at(&self, x: f64) -> f64 {
        let pos = (x - self.origin) / self.step;
        if !(pos >= 0.0) {
            return 0.0;
        }
        let cell = libm::floor(pos) as usize;
        if cell + 1 >= self.values.len() {
            return if cell + 1 == self.values.len() && pos == cell as f64 {
                self.values[cell]
            } else {
                0.0
            };
        }
        let frac = pos - cell as f64;
        self.values[cell] * (1.0 - frac) + self.values[cell + 1] * frac
    }
}

/// Either estimator behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityEstimate {
    Histogram(Histogram),
    Kernel(KernelDensity),
}

impl DensityEstimate {
    pub fn density_at(&self, x: f64) -> f64 {
        match self {
            DensityEstimate::Histogram(h) => h.density_at(x),
            DensityEstimate::Kernel(k) => k.density_at(x),
        }
    }

    /// `[a, b]` outside of which the estimate is zero.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DensityEstimate::Histogram(h) => (h.origin(), h.end()),
            DensityEstimate::Kernel(k) => k.support(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_matches_hand_values() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type7(&v, 0.25), 1.75);
        assert_eq!(quantile_type7(&v, 0.75), 3.25);
        assert_eq!(quantile_type7(&v, 1.0), 4.0);
        assert_eq!(quantile_type7(&v, 0.0), 1.0);
    }

    #[test]
    fn fd_width_examples() {
        // IQR = 1 with n = 1000: quartiles at 0.0 and 1.0
        let mut raw = vec![0.0; 1000];
        for v in raw.iter_mut().skip(500) {
            *v = 1.0;
        }
        let a = KeyArray::new(raw).unwrap();
        assert!((fd_bin_width(&a).unwrap() - 0.2).abs() < 1e-12);

        let grid = KeyArray::new((0..1000).map(|i| i as f64 / 999.0).collect()).unwrap();
        assert!((fd_bin_width(&grid).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn fd_width_degenerate() {
        let same = KeyArray::new(vec![3.0; 16]).unwrap();
        assert_eq!(
            fd_bin_width(&same),
            Err(StatsError::DegenerateIQR { fallback: 0.0 })
        );
        // Quartiles coincide but the range does not.
        let mut raw = vec![5.0; 14];
        raw.push(0.0);
        raw.push(10.0);
        let a = KeyArray::new(raw).unwrap();
        assert_eq!(
            fd_bin_width(&a),
            Err(StatsError::DegenerateIQR { fallback: 2.5 })
        );
        let tiny = KeyArray::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            fd_bin_width(&tiny),
            Err(StatsError::TooFewKeys { .. })
        ));
    }

    #[test]
    fn histogram_examples() {
        let a = KeyArray::new(vec![0.1, 0.3, 0.6, 0.8]).unwrap();
        let h = histogram_density(&a, 0.5).unwrap();
        assert_eq!(h.heights(), &[1.0, 1.0]);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);

        let one = histogram_density(&a, 2.0).unwrap();
        assert_eq!(one.heights(), &[0.5]);
        assert_eq!(one.density_at(0.5), 0.5);
        assert_eq!(one.density_at(-1.0), 0.0);
        assert!(histogram_density(&a, 0.0).is_err());
        assert!(histogram_density(&a, f64::NAN).is_err());
    }

    #[test]
    fn kde_positive_between_points() {
        let a = KeyArray::new(vec![0.0, 1.0]).unwrap();
        let k = kde_density(&a, Some(0.5)).unwrap();
        assert!(k.density_at(0.5) > 0.0);
        assert!(kde_density(&KeyArray::new(vec![1.0]).unwrap(), None).is_err());
        assert!(kde_density(&KeyArray::new(vec![1.0, 1.0]).unwrap(), None).is_err());
    }

    #[test]
    fn gridded_tracks_direct_evaluation() {
        let a = KeyArray::new((0..500).map(|i| ((i * 37) % 500) as f64 / 250.0).collect()).unwrap();
        let k = kde_density(&a, None).unwrap();
        let g = k.gridded();
        for i in 0..100 {
            let x = -0.2 + i as f64 * 0.024;
            let exact = k.density_at(x);
            assert!(
                (g.density_at(x) - exact).abs() < 0.01 * exact.max(0.1),
                "x={x}"
            );
        }
    }
}
