//! Cutting a continuous joint stream into fixed-length demonstrations around
//! the fastest movements.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::trajectory::{DemoSet, JointTrajectory};

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub demos: DemoSet,
    /// Stream sample index of each selected peak, in time order.
    pub peaks: Vec<usize>,
    /// Stream sample index of each window's first sample.
    pub starts: Vec<usize>,
    pub window_len: usize,
}

impl Segmentation {
    pub fn peak_times(&self, stream: &JointTrajectory) -> Vec<f64> {
        self.peaks.iter().map(|&k| stream.times()[k]).collect()
    }
}

/// Joint-space speed per sample: Euclidean norm of the central-difference
/// velocity (one-sided at the two ends).
pub fn speed_profile(stream: &JointTrajectory) -> Array1<f64> {
    let q = stream.positions();
    let n = q.nrows();
    let dt = stream.dt();
    Array1::from_iter((0..n).map(|k| {
        let (lo, hi, span) = match k {
            0 => (0, 1, dt),
            _ if k == n - 1 => (n - 2, n - 1, dt),
            _ => (k - 1, k + 1, 2.0 * dt),
        };
        q.row(hi).iter().zip(q.row(lo).iter()).map(|(a, b)| ((a - b) / span).powi(2)).sum::<f64>().sqrt()
    }))
}

/// Selects the `count` largest speed peaks and returns one window of
/// `round(window_secs / dt)` samples centered at each.
///
/// Candidates are visited by descending speed, earlier samples first on ties.
/// A candidate is skipped when its window would leave the stream or when it
/// lies closer than one window length to an already selected peak. Samples
/// with zero speed are never peaks.
pub fn segment_demonstrations(stream: &JointTrajectory, count: usize, window_secs: f64) -> Result<Segmentation> {
    if count == 0 {
        return Err(Error::invalid("demonstration count must be at least 1"));
    }
    if !(window_secs > 0.0) || !window_secs.is_finite() {
        return Err(Error::invalid(format!("window must be positive, got {window_secs}")));
    }
    let window_len = (window_secs / stream.dt()).round() as usize;
    if window_len < 2 {
        return Err(Error::invalid(format!("window of {window_secs} s holds fewer than 2 samples")));
    }
    let n = stream.n_samples();
    if count * window_len > n {
        return Err(Error::invalid(format!("stream of {n} samples cannot hold {count} windows of {window_len}")));
    }

    let speed = speed_profile(stream);
    let mut order: Vec<usize> = (0..n).filter(|&k| speed[k] > 0.0).collect();
    order.sort_by(|&a, &b| speed[b].total_cmp(&speed[a]).then(a.cmp(&b)));

    let half = window_len / 2;
    let mut peaks: Vec<usize> = Vec::with_capacity(count);
    for k in order {
        if peaks.len() == count {
            break;
        }
        if k < half || k - half + window_len > n {
            continue;
        }
        if peaks.iter().any(|&p| p.abs_diff(k) < window_len) {
            continue;
        }
        peaks.push(k);
    }
    if peaks.len() < count {
        return Err(Error::TooFewPeaks { found: peaks.len(), requested: count });
    }
    peaks.sort_unstable();
    let starts: Vec<usize> = peaks.iter().map(|&k| k - half).collect();
    let demos = starts.iter().map(|&s| stream.window(s, window_len)).collect::<Result<Vec<_>>>()?;
    Ok(Segmentation { demos: DemoSet::new(demos)?, peaks, starts, window_len })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn spike_stream(len: usize, rate: f64, spikes: &[usize], shift: usize) -> JointTrajectory {
        let mut q = Array2::<f64>::zeros((len + shift, 2));
        for &s in spikes {
            // narrow bump, peak speed on its flanks
            for k in 0..len {
                let x = (k as f64 - s as f64) / 3.0;
                q[[k + shift, 0]] += (-0.5 * x * x).exp();
            }
        }
        JointTrajectory::uniform(1.0 / rate, q).unwrap()
    }

    /// Exhaustive reference: best-scoring admissible sample, repeatedly.
    fn scan_peaks(stream: &JointTrajectory, count: usize, len: usize) -> Vec<usize> {
        let q = stream.positions();
        let n = q.nrows();
        let dt = stream.dt();
        let score = |k: usize| -> f64 {
            if k == 0 || k == n - 1 {
                return -1.0;
            }
            let mut s = 0.0;
            for i in 0..q.ncols() {
                let v = (q[[k + 1, i]] - q[[k - 1, i]]) / (2.0 * dt);
                s += v * v;
            }
            s
        };
        let mut chosen: Vec<usize> = Vec::new();
        for _ in 0..count {
            let mut best: Option<(usize, f64)> = None;
            for k in 0..n {
                let fits = k >= len / 2 && k - len / 2 + len <= n;
                let apart = chosen.iter().all(|&c| c.abs_diff(k) >= len);
                let s = score(k);
                if fits && apart && s > 0.0 && best.is_none_or(|(_, b)| s > b) {
                    best = Some((k, s));
                }
            }
            chosen.push(best.unwrap().0);
        }
        chosen.sort_unstable();
        chosen
    }

    #[test]
    fn finds_two_injected_spikes() {
        let stream = spike_stream(2500, 500.0, &[500, 1500], 0);
        let seg = segment_demonstrations(&stream, 2, 1.0).unwrap();
        assert_eq!(seg.window_len, 500);
        assert_eq!(seg.demos.len(), 2);
        assert_eq!(seg.demos.n_samples(), 500);
        assert_eq!(seg.peaks, scan_peaks(&stream, 2, 500));
        let times = seg.peak_times(&stream);
        assert!((times[0] - 1.0).abs() <= 4.0 / 500.0);
        assert!((times[1] - 3.0).abs() <= 4.0 / 500.0);
        for (s, p) in seg.starts.iter().zip(&seg.peaks) {
            assert_eq!(p - s, 250);
        }
    }

    #[test]
    fn constant_stream_has_no_peaks() {
        let stream = JointTrajectory::uniform(0.002, Array2::from_elem((1000, 3), 0.4)).unwrap();
        assert!(matches!(segment_demonstrations(&stream, 1, 1.0), Err(Error::TooFewPeaks { found: 0, requested: 1 })));
    }

    #[test]
    fn close_peaks_are_not_both_selected() {
        // two bumps 0.4 s apart fit only one 1 s window
        let stream = spike_stream(2500, 500.0, &[1000, 1200], 0);
        assert!(matches!(segment_demonstrations(&stream, 2, 1.0), Err(Error::TooFewPeaks { found: 1, requested: 2 })));
    }

    #[test]
    fn clipped_windows_are_rejected() {
        // the stronger bump sits 0.2 s from the start; its window would be truncated
        let mut q = Array2::<f64>::zeros((2000, 1));
        for k in 0..2000 {
            let a = (k as f64 - 100.0) / 3.0;
            let b = (k as f64 - 1200.0) / 6.0;
            q[[k, 0]] = 2.0 * (-0.5 * a * a).exp() + (-0.5 * b * b).exp();
        }
        let stream = JointTrajectory::uniform(0.002, q).unwrap();
        let seg = segment_demonstrations(&stream, 1, 1.0).unwrap();
        assert!(seg.peaks[0].abs_diff(1200) <= 8);
    }

    #[test]
    fn shift_moves_windows_by_same_amount() {
        let a = spike_stream(3000, 500.0, &[700, 1900], 0);
        let b = spike_stream(3000, 500.0, &[700, 1900], 37);
        let sa = segment_demonstrations(&a, 2, 1.0).unwrap();
        let sb = segment_demonstrations(&b, 2, 1.0).unwrap();
        for (x, y) in sa.starts.iter().zip(&sb.starts) {
            assert_eq!(x + 37, *y);
        }
    }

    #[test]
    fn default_rate_and_window_give_500_samples() {
        let stream = spike_stream(1500, 500.0, &[750], 0);
        let seg = segment_demonstrations(&stream, 1, 1.0).unwrap();
        assert_eq!(seg.demos.n_samples(), 500);
        assert_eq!(seg.demos.demos()[0].start_time(), 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let stream = spike_stream(1500, 500.0, &[750], 0);
        assert!(segment_demonstrations(&stream, 0, 1.0).is_err());
        assert!(segment_demonstrations(&stream, 1, 0.0).is_err());
        assert!(segment_demonstrations(&stream, 4, 1.0).is_err());
    }
}
