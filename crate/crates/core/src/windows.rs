//! Transparency-window detection on an absorption spectrum.
//!
//! A window is a local minimum of ε_R whose nearest local maxima on both
//! sides rise above it by at least `prominence × (max ε_R − min ε_R)`.
//! Sweep endpoints are not local maxima.

/// One detected transparency window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    /// Grid index of the absorption minimum.
    pub index: usize,
    /// δ at the minimum, rad/s.
    pub delta_min: f64,
    /// Absorption at the minimum.
    pub value: f64,
    /// Height of the lower bracketing maximum above the minimum.
    pub depth: f64,
    /// Full width at half depth, rad/s, from linear interpolation.
    pub width: f64,
    pub left_peak: f64,
    pub right_peak: f64,
}

/// Walks from `i` in direction `step` while the values do not decrease.
fn climb(y: &[f64], mut i: usize, forward: bool) -> Option<usize> {
    loop {
        let next = if forward { i.checked_add(1).filter(|&n| n < y.len()) } else { i.checked_sub(1) };
        match next {
            Some(n) if y[n] >= y[i] => i = n,
            Some(_) => return Some(i),
            None => return None,
        }
    }
}

/// Interpolated δ where the spectrum crosses `level` between indices `from`
/// (below the level) and `to` (at or above it).
fn crossing(spectrum: &[(f64, f64)], from: usize, to: usize, level: f64) -> f64 {
    let forward = to > from;
    let mut i = from;
    while i != to {
        let j = if forward { i + 1 } else { i - 1 };
        let (xa, ya) = spectrum[i];
        let (xb, yb) = spectrum[j];
        if yb >= level {
            if yb == ya {
                return xb;
            }
            return xa + (level - ya) / (yb - ya) * (xb - xa);
        }
        i = j;
    }
    spectrum[to].0
}

pub fn find_transparency_windows(spectrum: &[(f64, f64)], prominence: f64) -> Vec<Window> {
    let n = spectrum.len();
    if n < 3 {
        return Vec::new();
    }
    let y: Vec<f64> = spectrum.iter().map(|p| p.1).collect();
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Vec::new();
    }
    let threshold = prominence * range;

    let mut out = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if !(y[i] < y[i - 1]) {
            i += 1;
            continue;
        }
        // Extend across a flat bottom.
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 >= n || !(y[j + 1] > y[j]) {
            i = j + 1;
            continue;
        }
        let center = (i + j) / 2;
        if let (Some(l), Some(r)) = (climb(&y, i, false), climb(&y, j, true)) {
            let value = y[center];
            let left_peak = y[l];
            let right_peak = y[r];
            if left_peak - value >= threshold && right_peak - value >= threshold {
                let depth = left_peak.min(right_peak) - value;
                let half = value + 0.5 * depth;
                let width = crossing(spectrum, j, r, half) - crossing(spectrum, i, l, half);
                out.push(Window {
                    index: center,
                    delta_min: spectrum[center].0,
                    value,
                    depth,
                    width,
                    left_peak,
                    right_peak,
                });
            }
        }
        i = j + 1;
    }
    out
}
