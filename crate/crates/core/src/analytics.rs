//! Longitudinal progress across a patient's sessions and rule-based
//! suggestions.
//!
//! Trends are least-squares lines over the session index `0..n`. Suggestions
//! come from a [`RuleTable`], plain data that can be loaded from JSON. The
//! built-in table, version 1:
//!
//! | id | statistic | metric | condition | min sessions | suggestion |
//! |----|-----------|--------|-----------|--------------|------------|
//! | R1 | slope  | pitch_change_mel  | `< 0`   | 3 | increase y_spread |
//! | R2 | latest | hit_rate          | `> 0.9` | 1 | raise voice_maintenance_ms |
//! | R3 | slope  | phonation_time_ms | `<= 0`  | 5 | flag for therapist review |

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::SessionMetrics;
use crate::session::SessionRecord;
use crate::stats::linear_fit_points;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    /// Change per session.
    pub slope: f64,
    pub intercept: f64,
    /// Number of sessions the line was fitted to.
    pub n: usize,
}

impl Trend {
    /// Fits the present values; absent ones are skipped but keep their index.
    fn fit(values: impl Iterator<Item = Option<f64>>) -> Option<Self> {
        let pts: Vec<(f64, f64)> = values
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i as f64, v)))
            .collect();
        linear_fit_points(&pts).map(|(slope, intercept)| Self {
            slope,
            intercept,
            n: pts.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PhonationTimeMs,
    PitchChangeMel,
    DurationS,
    ReactionTimeMs,
    Score,
    HitRate,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::PhonationTimeMs,
        Metric::PitchChangeMel,
        Metric::DurationS,
        Metric::ReactionTimeMs,
        Metric::Score,
        Metric::HitRate,
    ];

    pub fn of(self, m: &SessionMetrics) -> Option<f64> {
        match self {
            Metric::PhonationTimeMs => Some(m.phonation_time_ms),
            Metric::PitchChangeMel => Some(m.pitch_change_mel),
            Metric::DurationS => Some(m.duration_s),
            Metric::ReactionTimeMs => m.reaction_time_ms,
            Metric::Score => Some(f64::from(m.score)),
            Metric::HitRate => m.hit_rate,
        }
    }
}

/// One trend per metric; `None` when the metric was never defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trends {
    pub phonation_time_ms: Trend,
    pub pitch_change_mel: Trend,
    pub duration_s: Trend,
    pub score: Trend,
    pub reaction_time_ms: Option<Trend>,
    pub hit_rate: Option<Trend>,
}

impl Trends {
    pub fn get(&self, metric: Metric) -> Option<&Trend> {
        match metric {
            Metric::PhonationTimeMs => Some(&self.phonation_time_ms),
            Metric::PitchChangeMel => Some(&self.pitch_change_mel),
            Metric::DurationS => Some(&self.duration_s),
            Metric::Score => Some(&self.score),
            Metric::ReactionTimeMs => self.reaction_time_ms.as_ref(),
            Metric::HitRate => self.hit_rate.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub rule_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressReport {
    pub patient_id: String,
    pub sessions: usize,
    pub trends: Trends,
    pub latest: SessionMetrics,
    pub rules_version: u32,
    pub suggestions: Vec<Suggestion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Slope,
    Latest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparison {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Lt => value < threshold,
            Comparison::Le => value <= threshold,
            Comparison::Gt => value > threshold,
            Comparison::Ge => value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub statistic: Statistic,
    pub metric: Metric,
    pub comparison: Comparison,
    pub threshold: f64,
    /// For slopes, the trend must cover at least this many sessions.
    pub min_sessions: usize,
    pub suggestion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable {
    pub version: u32,
    pub rules: Vec<Rule>,
}

impl Default for RuleTable {
    fn default() -> Self {
        let rule = |id: &str, statistic, metric, comparison, threshold, min_sessions, text: &str| Rule {
            id: id.to_string(),
            statistic,
            metric,
            comparison,
            threshold,
            min_sessions,
            suggestion: text.to_string(),
        };
        Self {
            version: 1,
            rules: vec![
                rule(
                    "R1",
                    Statistic::Slope,
                    Metric::PitchChangeMel,
                    Comparison::Lt,
                    0.0,
                    3,
                    "increase y_spread",
                ),
                rule(
                    "R2",
                    Statistic::Latest,
                    Metric::HitRate,
                    Comparison::Gt,
                    0.9,
                    1,
                    "raise voice_maintenance_ms",
                ),
                rule(
                    "R3",
                    Statistic::Slope,
                    Metric::PhonationTimeMs,
                    Comparison::Le,
                    0.0,
                    5,
                    "flag for therapist review",
                ),
            ],
        }
    }
}

/// Evaluates `rules` in table order.
pub fn suggest(report: &ProgressReport, rules: &RuleTable) -> Vec<Suggestion> {
    rules
        .rules
        .iter()
        .filter(|r| {
            let (value, n) = match r.statistic {
                Statistic::Slope => match report.trends.get(r.metric) {
                    Some(t) => (Some(t.slope), t.n),
                    None => (None, 0),
                },
                Statistic::Latest => (r.metric.of(&report.latest), report.sessions),
            };
            n >= r.min_sessions && value.is_some_and(|v| r.comparison.holds(v, r.threshold))
        })
        .map(|r| Suggestion {
            rule_id: r.id.clone(),
            text: r.suggestion.clone(),
        })
        .collect()
}

/// Progress over a patient's sessions, oldest first.
pub fn analyze_progress(sessions: &[SessionRecord], rules: &RuleTable) -> Result<ProgressReport> {
    let first = sessions
        .first()
        .ok_or_else(|| Error::structural("no sessions to analyze"))?;
    if let Some(other) = sessions.iter().find(|s| s.patient_id != first.patient_id) {
        return Err(Error::structural(format!(
            "sessions from different patients: {} and {}",
            first.patient_id, other.patient_id
        )));
    }
    if sessions.windows(2).any(|w| w[1].started_at < w[0].started_at) {
        return Err(Error::structural("sessions are not in chronological order"));
    }
    let metrics: Vec<SessionMetrics> = sessions.iter().map(|s| s.metrics.clone()).collect();
    analyze_metrics(&first.patient_id, &metrics, rules)
}

/// Same as [`analyze_progress`] on bare metrics.
pub fn analyze_metrics(patient_id: &str, metrics: &[SessionMetrics], rules: &RuleTable) -> Result<ProgressReport> {
    let latest = metrics
        .last()
        .ok_or_else(|| Error::structural("no sessions to analyze"))?
        .clone();
    let fit = |m: Metric| Trend::fit(metrics.iter().map(|s| m.of(s)));
    let required = |m: Metric| fit(m).ok_or_else(|| Error::structural("empty series"));
    let trends = Trends {
        phonation_time_ms: required(Metric::PhonationTimeMs)?,
        pitch_change_mel: required(Metric::PitchChangeMel)?,
        duration_s: required(Metric::DurationS)?,
        score: required(Metric::Score)?,
        reaction_time_ms: fit(Metric::ReactionTimeMs),
        hit_rate: fit(Metric::HitRate),
    };
    for m in Metric::ALL {
        if let Some(t) = trends.get(m) {
            if !(t.slope.is_finite() && t.intercept.is_finite()) {
                return Err(Error::structural(format!("non-finite trend for {m:?}")));
            }
        }
    }
    let mut report = ProgressReport {
        patient_id: patient_id.to_string(),
        sessions: metrics.len(),
        trends,
        latest,
        rules_version: rules.version,
        suggestions: Vec::new(),
    };
    report.suggestions = suggest(&report, rules);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::sample_record;
    use proptest::prelude::*;

    fn metrics(phonation: f64, pitch: f64, hit_rate: Option<f64>) -> SessionMetrics {
        SessionMetrics {
            phonation_time_ms: phonation,
            pitch_change_mel: pitch,
            duration_s: 120.0,
            reaction_time_ms: None,
            score: 3,
            spawns: 6,
            hits: 3,
            misses: 3,
            hit_rate,
        }
    }

    fn ids(r: &ProgressReport) -> Vec<&str> {
        r.suggestions.iter().map(|s| s.rule_id.as_str()).collect()
    }

    #[test]
    fn perfect_line() {
        let m: Vec<_> = [1000.0, 2000.0, 3000.0].iter().map(|&p| metrics(p, 100.0, Some(0.5))).collect();
        let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
        assert_eq!(r.trends.phonation_time_ms, Trend { slope: 1000.0, intercept: 1000.0, n: 3 });
    }

    #[test]
    fn identical_sessions_have_flat_trends() {
        let m = vec![metrics(1234.5678, 97.3, Some(0.1)); 7];
        let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
        for metric in Metric::ALL {
            if let Some(t) = r.trends.get(metric) {
                assert_eq!(t.slope, 0.0, "{metric:?}");
            }
        }
        // flat phonation over 7 sessions is not progress
        assert_eq!(ids(&r), ["R3"]);
    }

    #[test]
    fn single_session() {
        let m = [metrics(800.0, 50.0, Some(0.5))];
        let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
        assert_eq!(r.trends.pitch_change_mel.slope, 0.0);
        assert_eq!(r.latest, m[0]);
        assert_eq!(r.sessions, 1);
    }

    #[test]
    fn no_rule_fires_on_rising_trends() {
        let m: Vec<_> = (0..4).map(|i| metrics(1000.0 + i as f64, 80.0 + i as f64, Some(0.5))).collect();
        let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
        assert!(r.suggestions.is_empty());
    }

    #[test]
    fn r2_on_high_hit_rate() {
        let m = [metrics(1000.0, 80.0, Some(0.5)), metrics(1100.0, 90.0, Some(0.95))];
        let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
        assert_eq!(ids(&r), ["R2"]);
        assert_eq!(r.suggestions[0].text, "raise voice_maintenance_ms");
    }

    #[test]
    fn r3_on_declining_phonation() {
        let m: Vec<_> = (0..5).map(|i| metrics(5000.0 - 100.0 * i as f64, 80.0 + i as f64, None)).collect();
        let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
        assert_eq!(ids(&r), ["R3"]);
        let four = analyze_metrics("p", &m[..4], &RuleTable::default()).unwrap();
        assert!(four.suggestions.is_empty());
    }

    #[test]
    fn r1_needs_three_sessions() {
        let m: Vec<_> = (0..3).map(|i| metrics(1000.0 + i as f64, 100.0 - i as f64, None)).collect();
        assert_eq!(ids(&analyze_metrics("p", &m, &RuleTable::default()).unwrap()), ["R1"]);
        assert!(analyze_metrics("p", &m[..2], &RuleTable::default()).unwrap().suggestions.is_empty());
    }

    #[test]
    fn rule_table_is_data() {
        let mut rules = RuleTable::default();
        rules.rules[1].threshold = 0.4;
        rules.version = 2;
        let m = [metrics(1000.0, 80.0, Some(0.5))];
        let r = analyze_metrics("p", &m, &rules).unwrap();
        assert_eq!(ids(&r), ["R2"]);
        assert_eq!(r.rules_version, 2);
    }

    #[test]
    fn mixed_patients_rejected() {
        let a = sample_record(1, "alice");
        let b = sample_record(2, "bob");
        assert!(matches!(analyze_progress(&[a.clone(), b], &RuleTable::default()), Err(Error::Structural(_))));
        assert!(analyze_progress(&[], &RuleTable::default()).is_err());
        assert_eq!(analyze_progress(&[a], &RuleTable::default()).unwrap().sessions, 1);
    }

    #[test]
    fn out_of_order_rejected() {
        let a = sample_record(1, "p");
        let b = sample_record(2, "p");
        assert!(analyze_progress(&[b, a], &RuleTable::default()).is_err());
    }

    #[test]
    fn optional_metrics_skip_missing_sessions() {
        let m = [metrics(1.0, 1.0, None), metrics(1.0, 1.0, Some(0.2)), metrics(1.0, 1.0, Some(0.4))];
        let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
        let t = r.trends.hit_rate.unwrap();
        assert_eq!(t.n, 2);
        assert!((t.slope - 0.2).abs() < 1e-12);
        assert!(t.intercept.abs() < 1e-12);
        assert_eq!(r.trends.reaction_time_ms, None);
    }

    fn brute_force_slope(y: &[f64]) -> f64 {
        // Normal equations in raw sums, independent of the centered formula.
        let n = y.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for (i, v) in y.iter().enumerate() {
            let x = i as f64;
            sx += x;
            sy += v;
            sxx += x * x;
            sxy += x * v;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    proptest! {
        #[test]
        fn slopes_match_normal_equations(y in prop::collection::vec(0.0f64..10_000.0, 2..40)) {
            let m: Vec<_> = y.iter().map(|&p| metrics(p, 1.0, None)).collect();
            let r = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
            let expected = brute_force_slope(&y);
            let got = r.trends.phonation_time_ms.slope;
            prop_assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{} vs {}", got, expected);
        }

        #[test]
        fn suggestions_are_pure(y in prop::collection::vec(0.0f64..10_000.0, 1..10), h in 0.0f64..1.0) {
            let m: Vec<_> = y.iter().map(|&p| metrics(p, p / 10.0, Some(h))).collect();
            let a = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
            let b = analyze_metrics("p", &m, &RuleTable::default()).unwrap();
            prop_assert_eq!(&a.suggestions, &suggest(&a, &RuleTable::default()));
            prop_assert_eq!(a, b);
        }
    }
}
