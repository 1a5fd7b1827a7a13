//! Agglomerative merging of adjacent gray-level classes.
//!
//! Every nonempty gray level starts as its own class. At each stage the
//! adjacent pair with the smallest Ward distance
//!
//! ```text
//! d² = n_l n_r / (n_l + n_r) · (a_l - a_r)²
//! ```
//!
//! is merged. `d²` is exactly the within-class scatter gained (and the
//! between-class scatter lost) by the merge, so the unbiased variance
//! estimators
//!
//! ```text
//! v(i) = (N - K(i-1)) / (N - K(i)) · v(i-1) + d² / (N - K(i))
//! w(i) = (K(i-1) - 1) / (K(i) - 1) · w(i-1) - d² / (K(i) - 1)
//! ```
//!
//! are carried forward in O(1) per merge instead of being recomputed from
//! the pixels. A full run to a single class costs O(K(0)²).

use serde::Serialize;
use thiserror::Error;

use crate::histogram::Histogram;
use crate::thresholds::ThresholdSet;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("need at least two classes to merge")]
    SingleClass,
    #[error("cannot stop at {stop} classes: histogram has {classes} nonempty gray levels")]
    InvalidStop { stop: usize, classes: usize },
    #[error("level {level} is outside the available range {min}..={max}")]
    InvalidLevel {
        level: usize,
        min: usize,
        max: usize,
    },
    #[error("invalid class array: {0}")]
    InvalidClasses(&'static str),
}

/// One class: `n` pixels with weighted mean gray `a`, covering the
/// inclusive gray range `g_lo..=g_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassRecord {
    pub n: u64,
    pub a: f64,
    pub g_lo: u32,
    pub g_hi: u32,
}

impl ClassRecord {
    pub fn singleton(gray: u32, n: u64) -> Self {
        Self {
            n,
            a: gray as f64,
            g_lo: gray,
            g_hi: gray,
        }
    }
}

/// Ward distance between two classes; the scatter cost of merging them.
pub fn pair_distance(left: &ClassRecord, right: &ClassRecord) -> f64 {
    let (nl, nr) = (left.n as f64, right.n as f64);
    let diff = left.a - right.a;
    nl * nr / (nl + nr) * diff * diff
}

/// Ordered classes at one stage of the recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassArray {
    classes: Vec<ClassRecord>,
    grand_mean: f64,
    total: u64,
    stage: usize,
}

impl ClassArray {
    /// Wraps an explicit class list as stage 0. Counts must be positive and
    /// gray ranges sorted and disjoint.
    pub fn from_classes(classes: Vec<ClassRecord>) -> Result<Self, EngineError> {
        if classes.is_empty() {
            return Err(EngineError::InvalidClasses("no classes"));
        }
        if classes.iter().any(|c| c.n == 0) {
            return Err(EngineError::InvalidClasses("empty class"));
        }
        if classes.iter().any(|c| c.g_lo > c.g_hi || !c.a.is_finite()) {
            return Err(EngineError::InvalidClasses("bad class range or mean"));
        }
        if classes.windows(2).any(|w| w[0].g_hi >= w[1].g_lo) {
            return Err(EngineError::InvalidClasses(
                "classes overlap or are unsorted",
            ));
        }
        let total: u64 = classes.iter().map(|c| c.n).sum();
        let weighted: f64 = classes.iter().map(|c| c.n as f64 * c.a).sum();
        Ok(Self {
            grand_mean: weighted / total as f64,
            classes,
            total,
            stage: 0,
        })
    }

    pub fn classes(&self) -> &[ClassRecord] {
        &self.classes
    }

    /// Current class count `K`.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Total pixel count `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of merges applied since the initial array.
    pub fn stage(&self) -> usize {
        self.stage
    }

    /// `sum_k n_k (a_k - a)^2`, evaluated directly from the classes.
    pub fn between_scatter(&self) -> f64 {
        self.classes
            .iter()
            .map(|c| {
                let dev = c.a - self.grand_mean;
                c.n as f64 * dev * dev
            })
            .sum()
    }

    /// Between-class variance estimator `w`; `None` for a single class.
    pub fn between_variance(&self) -> Option<f64> {
        let k = self.len();
        (k > 1).then(|| self.between_scatter() / (k - 1) as f64)
    }
}

/// One class per nonempty gray level. Empty bins carry no pixels and are
/// skipped, so `K(0)` is the number of distinct gray levels present.
pub fn build_initial(h: &Histogram) -> ClassArray {
    let classes = h
        .nonempty()
        .map(|(g, c)| ClassRecord::singleton(g as u32, c))
        .collect();
    ClassArray {
        classes,
        grand_mean: h.grand_mean(),
        total: h.total(),
        stage: 0,
    }
}

/// Index of the adjacent pair with minimal [`pair_distance`]; the lowest
/// index wins ties.
pub fn find_min_pair(c: &ClassArray) -> Result<usize, EngineError> {
    let gaps: Vec<f64> = c
        .classes
        .windows(2)
        .map(|w| pair_distance(&w[0], &w[1]))
        .collect();
    argmin(&gaps).ok_or(EngineError::SingleClass)
}

fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &d) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Bookkeeping for one merge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergeRecord {
    /// 1-based recursion index `i`.
    pub step: usize,
    /// Index of the left class of the merged pair before the merge.
    #[serde(skip)]
    pub left_index: usize,
    /// Upper gray level of the left class; names the cut that disappears.
    pub boundary_gray: u32,
    pub d_sq: f64,
    pub v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(rename = "K_after")]
    pub k_after: usize,
}

/// Merge state with cached adjacent distances. Only the two distances that
/// touch the merged class are recomputed per step.
struct Agglomerator {
    classes: Vec<ClassRecord>,
    gaps: Vec<f64>,
    total: u64,
    grand_mean: f64,
    stage: usize,
    v: f64,
    w: f64,
}

impl Agglomerator {
    fn new(c: &ClassArray, v: f64, w: f64) -> Self {
        let gaps = c
            .classes
            .windows(2)
            .map(|p| pair_distance(&p[0], &p[1]))
            .collect();
        Self {
            classes: c.classes.clone(),
            gaps,
            total: c.total,
            grand_mean: c.grand_mean,
            stage: c.stage,
            v,
            w,
        }
    }

    fn merge_min(&mut self) -> Option<MergeRecord> {
        let l = argmin(&self.gaps)?;
        let d_sq = self.gaps[l];
        let (left, right) = (self.classes[l], self.classes[l + 1]);

        let n = left.n + right.n;
        self.classes[l] = ClassRecord {
            n,
            a: (left.n as f64 * left.a + right.n as f64 * right.a) / n as f64,
            g_lo: left.g_lo,
            g_hi: right.g_hi,
        };
        self.classes.remove(l + 1);
        self.gaps.remove(l);
        if l > 0 {
            self.gaps[l - 1] = pair_distance(&self.classes[l - 1], &self.classes[l]);
        }
        if l < self.gaps.len() {
            self.gaps[l] = pair_distance(&self.classes[l], &self.classes[l + 1]);
        }

        let total = self.total as f64;
        let k_prev = (self.classes.len() + 1) as f64;
        let k_now = self.classes.len() as f64;
        self.v = ((total - k_prev) * self.v + d_sq) / (total - k_now);
        let w = if self.classes.len() > 1 {
            self.w = (((k_prev - 1.0) * self.w - d_sq) / (k_now - 1.0)).max(0.0);
            Some(self.w)
        } else {
            self.w = f64::NAN;
            None
        };
        self.stage += 1;

        Some(MergeRecord {
            step: self.stage,
            left_index: l,
            boundary_gray: left.g_hi,
            d_sq,
            v: self.v,
            w,
            q: w.filter(|&w| w > 0.0).map(|w| self.v / w),
            k_after: self.classes.len(),
        })
    }

    fn snapshot(&self) -> ClassArray {
        ClassArray {
            classes: self.classes.clone(),
            grand_mean: self.grand_mean,
            total: self.total,
            stage: self.stage,
        }
    }
}

/// Merges the closest adjacent pair of `c`, carrying the variance
/// estimators `v_prev`, `w_prev` forward recursively.
pub fn merge_step(
    c: &ClassArray,
    v_prev: f64,
    w_prev: f64,
) -> Result<(ClassArray, MergeRecord), EngineError> {
    let mut agg = Agglomerator::new(c, v_prev, w_prev);
    let record = agg.merge_min().ok_or(EngineError::SingleClass)?;
    Ok((agg.snapshot(), record))
}

/// The full merge history of one histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeTrace {
    levels: usize,
    initial: ClassArray,
    initial_w: Option<f64>,
    records: Vec<MergeRecord>,
    ss_total: f64,
}

/// Variance estimators at one stage of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageVariances {
    pub classes: usize,
    pub v: f64,
    pub w: Option<f64>,
    pub q: Option<f64>,
}

impl MergeTrace {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn initial(&self) -> &ClassArray {
        &self.initial
    }

    pub fn records(&self) -> &[MergeRecord] {
        &self.records
    }

    /// `sum_g h(g) (g - a)^2` of the source histogram.
    pub fn ss_total(&self) -> f64 {
        self.ss_total
    }

    /// `K(0)`, the number of nonempty gray levels.
    pub fn initial_classes(&self) -> usize {
        self.initial.len()
    }

    /// Smallest class count this trace reaches.
    pub fn final_classes(&self) -> usize {
        self.records
            .last()
            .map_or(self.initial.len(), |r| r.k_after)
    }

    /// `v`, `w`, `q` at the stage holding `classes` classes.
    pub fn variances_at(&self, classes: usize) -> Option<StageVariances> {
        if classes == self.initial.len() {
            return Some(StageVariances {
                classes,
                v: 0.0,
                w: self.initial_w,
                q: self.initial_w.filter(|&w| w > 0.0).map(|_| 0.0),
            });
        }
        self.records
            .iter()
            .find(|r| r.k_after == classes)
            .map(|r| StageVariances {
                classes,
                v: r.v,
                w: r.w,
                q: r.q,
            })
    }

    /// Serializable view with the fields `G`, `N`, `grand_mean`, `ss_total`,
    /// `initial_classes` and `merges`.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct TraceJson<'a> {
            version: &'static str,
            #[serde(rename = "G")]
            levels: usize,
            #[serde(rename = "N")]
            total: u64,
            grand_mean: f64,
            ss_total: f64,
            initial_classes: &'a [ClassRecord],
            merges: &'a [MergeRecord],
        }
        serde_json::to_value(TraceJson {
            version: crate::REPORT_VERSION,
            levels: self.levels,
            total: self.initial.total,
            grand_mean: self.initial.grand_mean,
            ss_total: self.ss_total,
            initial_classes: &self.initial.classes,
            merges: &self.records,
        })
        .expect("trace serializes")
    }
}

/// Runs the merge loop on `h` until `stop_at` classes remain.
pub fn run_dendrogram(h: &Histogram, stop_at: usize) -> Result<MergeTrace, EngineError> {
    let initial = build_initial(h);
    let k0 = initial.len();
    if stop_at == 0 || stop_at > k0 {
        return Err(EngineError::InvalidStop {
            stop: stop_at,
            classes: k0,
        });
    }
    let initial_w = initial.between_variance();
    let mut agg = Agglomerator::new(&initial, 0.0, initial_w.unwrap_or(f64::NAN));
    let mut records = Vec::with_capacity(k0 - stop_at);
    while agg.classes.len() > stop_at {
        records.push(agg.merge_min().expect("at least two classes remain"));
    }
    Ok(MergeTrace {
        levels: h.levels(),
        initial,
        initial_w,
        records,
        ss_total: h.total_scatter(),
    })
}

/// Convenience for the complete dendrogram down to one class.
pub fn full_dendrogram(h: &Histogram) -> MergeTrace {
    run_dendrogram(h, 1).expect("a histogram always has at least one class")
}

/// Cut of the dendrogram with exactly `m` classes, rebuilt by replaying the
/// first `K(0) - m` merges.
pub fn thresholds_at(trace: &MergeTrace, m: usize) -> Result<ThresholdSet, EngineError> {
    let k0 = trace.initial_classes();
    let min = trace.final_classes();
    if m < min || m > k0 {
        return Err(EngineError::InvalidLevel {
            level: m,
            min,
            max: k0,
        });
    }
    let mut removed: Vec<u32> = trace.records[..k0 - m]
        .iter()
        .map(|r| r.boundary_gray)
        .collect();
    removed.sort_unstable();

    let mut cuts = Vec::with_capacity(m - 1);
    let mut means = Vec::with_capacity(m);
    let mut counts = Vec::with_capacity(m);
    let (mut n, mut weighted) = (0u64, 0f64);
    let initial = trace.initial.classes();
    for (k, c) in initial.iter().enumerate() {
        n += c.n;
        weighted += c.n as f64 * c.a;
        let last = k + 1 == initial.len();
        if last || removed.binary_search(&c.g_hi).is_err() {
            if !last {
                cuts.push(c.g_hi);
            }
            means.push(weighted / n as f64);
            counts.push(n);
            (n, weighted) = (0, 0.0);
        }
    }
    Ok(ThresholdSet::from_parts(trace.levels, cuts, means, counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(n: u64, a: f64) -> ClassRecord {
        let g = a.round() as u32;
        ClassRecord {
            n,
            a,
            g_lo: g,
            g_hi: g,
        }
    }

    fn toy() -> Histogram {
        Histogram::from_pairs(256, [(1, 2), (2, 2), (5, 1)]).unwrap()
    }

    #[test]
    fn initial_classes_skip_empty_bins() {
        let c = build_initial(&toy());
        assert_eq!(c.len(), 3);
        assert!((c.grand_mean() - 2.2).abs() < 1e-12);
        assert!((c.between_variance().unwrap() - 5.4).abs() < 1e-12);

        let single = build_initial(&Histogram::from_pairs(256, [(7, 10)]).unwrap());
        assert_eq!(single.len(), 1);
        assert_eq!(single.grand_mean(), 7.0);
        assert_eq!(single.between_variance(), None);
    }

    #[test]
    fn pair_distance_examples() {
        assert_eq!(pair_distance(&class(2, 1.0), &class(2, 2.0)), 1.0);
        assert_eq!(pair_distance(&class(2, 2.0), &class(1, 5.0)), 6.0);
        let (l, r) = (
            ClassRecord {
                n: 3,
                a: 4.0,
                g_lo: 0,
                g_hi: 4,
            },
            ClassRecord {
                n: 9,
                a: 4.0,
                g_lo: 5,
                g_hi: 9,
            },
        );
        assert_eq!(pair_distance(&l, &r), 0.0);
    }

    #[test]
    fn min_pair_prefers_lowest_index() {
        let c =
            ClassArray::from_classes(vec![class(2, 1.0), class(2, 2.0), class(1, 5.0)]).unwrap();
        assert_eq!(find_min_pair(&c), Ok(0));
        let tie =
            ClassArray::from_classes(vec![class(1, 0.0), class(1, 1.0), class(1, 2.0)]).unwrap();
        assert_eq!(find_min_pair(&tie), Ok(0));
        let one = ClassArray::from_classes(vec![class(5, 3.0)]).unwrap();
        assert_eq!(find_min_pair(&one), Err(EngineError::SingleClass));
    }

    #[test]
    fn merge_step_updates_estimators() {
        let c = build_initial(&toy());
        let (next, rec) = merge_step(&c, 0.0, 5.4).unwrap();
        assert_eq!(rec.left_index, 0);
        assert_eq!(rec.boundary_gray, 1);
        assert_eq!(rec.step, 1);
        assert_eq!(rec.k_after, 2);
        assert!((rec.d_sq - 1.0).abs() < 1e-12);
        assert!((rec.v - 1.0 / 3.0).abs() < 1e-12);
        assert!((rec.w.unwrap() - 9.8).abs() < 1e-12);
        assert!((rec.q.unwrap() - 1.0 / 29.4).abs() < 1e-12);
        assert_eq!(
            next.classes()[0],
            ClassRecord {
                n: 4,
                a: 1.5,
                g_lo: 1,
                g_hi: 2
            }
        );
        assert_eq!(next.stage(), 1);
    }

    #[test]
    fn zero_distance_merge_keeps_scatter() {
        let c = ClassArray::from_classes(vec![
            ClassRecord {
                n: 3,
                a: 4.0,
                g_lo: 0,
                g_hi: 4,
            },
            ClassRecord {
                n: 9,
                a: 4.0,
                g_lo: 5,
                g_hi: 9,
            },
            ClassRecord {
                n: 1,
                a: 10.0,
                g_lo: 10,
                g_hi: 10,
            },
        ])
        .unwrap();
        let w0 = c.between_variance().unwrap();
        let (next, rec) = merge_step(&c, 0.0, w0).unwrap();
        assert_eq!(rec.d_sq, 0.0);
        assert_eq!(rec.v, 0.0);
        assert!((rec.w.unwrap() * 1.0 - w0 * 2.0).abs() < 1e-9);
        assert_eq!(next.classes()[0].n, 12);
        assert_eq!(next.classes()[0].a, 4.0);
    }

    #[test]
    fn terminal_merge_has_no_between_variance() {
        let c = ClassArray::from_classes(vec![class(1, 0.0), class(1, 255.0)]).unwrap();
        let (next, rec) = merge_step(&c, 0.0, 1.0).unwrap();
        assert_eq!(next.len(), 1);
        assert_eq!(rec.w, None);
        assert_eq!(rec.q, None);
        assert_eq!(merge_step(&next, rec.v, 0.0), Err(EngineError::SingleClass));
    }

    #[test]
    fn dendrogram_of_toy_histogram() {
        let trace = run_dendrogram(&toy(), 1).unwrap();
        let r = trace.records();
        assert_eq!(r.len(), 2);
        assert!((r[1].d_sq - 9.8).abs() < 1e-12);
        assert!((r[1].v - 2.7).abs() < 1e-12);
        assert_eq!(r[1].w, None);
        assert!((trace.ss_total() - 10.8).abs() < 1e-12);
    }

    #[test]
    fn trivial_runs_are_empty() {
        let h = Histogram::from_pairs(256, [(7, 10)]).unwrap();
        assert!(run_dendrogram(&h, 1).unwrap().records().is_empty());
        let t = run_dendrogram(&toy(), 3).unwrap();
        assert!(t.records().is_empty());
        assert_eq!(
            run_dendrogram(&toy(), 4),
            Err(EngineError::InvalidStop {
                stop: 4,
                classes: 3
            })
        );
        assert!(run_dendrogram(&toy(), 0).is_err());
    }

    #[test]
    fn thresholds_replay_merges() {
        let h = toy();
        let trace = full_dendrogram(&h);
        let two = thresholds_at(&trace, 2).unwrap();
        assert_eq!(two.cuts(), &[2]);
        assert_eq!(two.means(), &[1.5, 5.0]);
        let three = thresholds_at(&trace, 3).unwrap();
        assert_eq!(three.cuts(), &[1, 2]);
        assert_eq!(thresholds_at(&trace, 1).unwrap().cuts(), &[] as &[u32]);
        assert!(matches!(
            thresholds_at(&trace, 4),
            Err(EngineError::InvalidLevel { level: 4, .. })
        ));

        let partial = run_dendrogram(&h, 2).unwrap();
        assert!(thresholds_at(&partial, 1).is_err());
        assert_eq!(thresholds_at(&partial, 2).unwrap().cuts(), &[2]);
    }

    #[test]
    fn trace_json_shape() {
        let trace = full_dendrogram(&toy());
        let j = trace.to_json();
        assert_eq!(j["G"], 256);
        assert_eq!(j["N"], 5);
        assert_eq!(j["initial_classes"].as_array().unwrap().len(), 3);
        let merges = j["merges"].as_array().unwrap();
        assert_eq!(merges[0]["K_after"], 2);
        assert!(merges[0].get("w").is_some());
        assert!(merges[1].get("w").is_none());
        assert!(merges[1].get("q").is_none());
        assert!(merges[0].get("left_index").is_none());
    }

    #[test]
    fn variances_at_stage() {
        let trace = full_dendrogram(&toy());
        let s0 = trace.variances_at(3).unwrap();
        assert_eq!(s0.v, 0.0);
        assert!((s0.w.unwrap() - 5.4).abs() < 1e-12);
        let s1 = trace.variances_at(2).unwrap();
        assert!((s1.v - 1.0 / 3.0).abs() < 1e-12);
        assert!(trace.variances_at(7).is_none());
    }
}
