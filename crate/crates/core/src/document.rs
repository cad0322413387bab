//! The self-describing result document written by the command-line tool.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::approximation::{ErrorReport, SweepPoint};
use crate::baselines::BaselineAux;
use crate::error::Result;
use crate::matrix::DataMatrix;
use crate::selection::{RankedScores, Ranking};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discard_correlated: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_length: Option<f64>,
    /// Support points left after duplicate removal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRef {
    pub index: usize,
    pub name: String,
}

/// One ranked feature; which score fields are present depends on the method.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub rank: usize,
    pub index: usize,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_float::option")]
    pub partial_dim: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_float::option")]
    pub id_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_float::option")]
    pub id_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_float::option")]
    pub id_approx: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub selected: Vec<usize>,
    /// `None` when nothing was planted.
    pub recall: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_error_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: usize,
    pub features: usize,
    pub planted: Vec<usize>,
    pub seed: u64,
    pub methods: Vec<BenchRow>,
}

type ScoreField = fn(&RankedFeature) -> Option<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub method: String,
    pub params: Params,
    pub rows: usize,
    pub features: usize,
    pub ranking: Vec<RankedFeature>,
    pub discarded: Vec<FeatureRef>,
    pub selected: Vec<FeatureRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_discard_correlation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_report: Option<ErrorReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineAux>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchReport>,
    pub timing: Vec<PhaseTiming>,
}

fn feature_ref(matrix: &DataMatrix, index: usize) -> FeatureRef {
    FeatureRef { index, name: matrix.name(index).to_string() }
}

impl ResultDocument {
    pub fn new(method: impl Into<String>, params: Params, matrix: &DataMatrix) -> Self {
        Self {
            method: method.into(),
            params,
            rows: matrix.n(),
            features: matrix.d(),
            ranking: Vec::new(),
            discarded: Vec::new(),
            selected: Vec::new(),
            last_discard_correlation: None,
            error_report: None,
            sweep: None,
            baseline: None,
            bench: None,
            timing: Vec::new(),
        }
    }

    /// Fills ranking, discards and (when `budget` is given) the selected prefix.
    pub fn with_ranking(mut self, ranking: &Ranking, matrix: &DataMatrix, budget: Option<usize>) -> Self {
        self.ranking = match &ranking.scores {
            RankedScores::Exact(scores) => scores
                .iter()
                .enumerate()
                .map(|(rank, s)| RankedFeature {
                    rank: rank + 1,
                    index: s.feature_index,
                    name: matrix.name(s.feature_index).to_string(),
                    delta_star: Some(s.delta_star),
                    delta: Some(s.delta),
                    partial_dim: Some(s.partial_dim),
                    ..Default::default()
                })
                .collect(),
            RankedScores::Bounded(bounds) => bounds
                .iter()
                .enumerate()
                .map(|(rank, b)| RankedFeature {
                    rank: rank + 1,
                    index: b.feature_index,
                    name: matrix.name(b.feature_index).to_string(),
                    delta_lower: Some(b.delta_lower),
                    delta_upper: Some(b.delta_upper),
                    id_lower: Some(b.id_lower),
                    id_upper: Some(b.id_upper),
                    id_approx: Some(b.id_approx),
                    ..Default::default()
                })
                .collect(),
        };
        self.discarded = ranking.discarded_by_correlation.iter().map(|&j| feature_ref(matrix, j)).collect();
        self.last_discard_correlation = ranking.last_discard_correlation;
        if let Some(b) = budget {
            self.selected = ranking.selected(b).iter().map(|&j| feature_ref(matrix, j)).collect();
        }
        self
    }

    /// Score-free ranking in the given order.
    pub fn with_order(mut self, order: &[usize], selected: &[usize], discarded: &[usize], matrix: &DataMatrix) -> Self {
        self.ranking = order
            .iter()
            .enumerate()
            .map(|(rank, &j)| RankedFeature {
                rank: rank + 1,
                index: j,
                name: matrix.name(j).to_string(),
                ..Default::default()
            })
            .collect();
        self.selected = selected.iter().map(|&j| feature_ref(matrix, j)).collect();
        self.discarded = discarded.iter().map(|&j| feature_ref(matrix, j)).collect();
        self
    }

    pub fn push_timing(&mut self, phase: &str, seconds: f64) {
        self.timing.push(PhaseTiming { phase: phase.to_string(), seconds });
    }

    /// The document with timings removed; equal inputs give equal values.
    pub fn without_timing(&self) -> Self {
        Self { timing: Vec::new(), ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Flat `rank,index,name,<score columns>` table of the ranking.
    pub fn write_scores_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let fields: [(&str, ScoreField); 8] = [
            ("delta_star", |r| r.delta_star),
            ("delta", |r| r.delta),
            ("partial_dim", |r| r.partial_dim),
            ("delta_lower", |r| r.delta_lower),
            ("delta_upper", |r| r.delta_upper),
            ("id_lower", |r| r.id_lower),
            ("id_upper", |r| r.id_upper),
            ("id_approx", |r| r.id_approx),
        ];
        let present: Vec<_> = fields.iter().filter(|(_, get)| self.ranking.iter().any(|r| get(r).is_some())).collect();
        let mut header = vec!["rank", "index", "name"];
        header.extend(present.iter().map(|(name, _)| *name));
        out.write_record(&header)?;
        for r in &self.ranking {
            let mut record = vec![r.rank.to_string(), r.index.to_string(), r.name.clone()];
            record.extend(present.iter().map(|(_, get)| get(r).map_or_else(String::new, |v| v.to_string())));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }
}
