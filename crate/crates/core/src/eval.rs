//! Evaluation: judge candidates against gold answers, compute recall at
//! rank 1 and 3, full-set recall and MRR, and render the results table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::analysis::token_set_match;
use crate::error::{Error, Result};
use crate::pipeline::{
    answer_question_with_layout, CandidateAnswer, Category, PipelineConfig, Question, Resources,
};
use crate::ranker::Model;

/// One line of a question file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question: String,
    #[serde(default)]
    pub answer: Option<String>,
    #[serde(default)]
    pub category: Option<String>,
}

impl QuestionRecord {
    pub fn into_question(self) -> std::result::Result<Question, String> {
        let q = Question::new(self.question, self.answer);
        match self.category.as_deref() {
            None => Ok(q),
            Some(c) => Category::parse(c)
                .map(|cat| q.with_category(cat))
                .ok_or_else(|| format!("unknown category {c:?}")),
        }
    }
}

/// Read a JSON Lines question file. An explicit category overrides
/// classification.
pub fn load_questions(path: &Path) -> Result<Vec<Question>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let rec: QuestionRecord =
            serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if rec.question.trim().is_empty() {
            return Err(malformed("empty question".into()));
        }
        out.push(rec.into_question().map_err(malformed)?);
    }
    Ok(out)
}

pub fn mark_correct(cands: &[CandidateAnswer], gold: &str) -> Vec<bool> {
    cands
        .iter()
        .map(|c| token_set_match(&c.answer_text, gold))
        .collect()
}

/// Rank (1-based) of the first `true` flag.
pub fn first_correct_rank(flags: &[bool]) -> Option<usize> {
    flags.iter().position(|&f| f).map(|i| i + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total_questions: usize,
    /// Questions with at least one correct candidate.
    pub questions_with_correct: usize,
    pub correct_at_rank1: usize,
    pub correct_in_top3: usize,
    pub recall_rank1: f64,
    pub recall_top3: f64,
    pub recall_full: f64,
    /// Mean reciprocal rank over questions with a correct candidate; absent
    /// when there are none.
    pub mrr: Option<f64>,
}

/// Metrics from per-question correctness flags in rank order. Recall is over
/// all questions; MRR only over questions that have a correct candidate.
pub fn compute_metrics(flags: &[Vec<bool>]) -> Metrics {
    let total = flags.len();
    let firsts: Vec<Option<usize>> = flags.iter().map(|f| first_correct_rank(f)).collect();
    let rank1 = firsts.iter().filter(|r| **r == Some(1)).count();
    let top3 = firsts
        .iter()
        .filter(|r| matches!(r, Some(k) if *k <= 3))
        .count();
    let found: Vec<usize> = firsts.iter().flatten().copied().collect();
    let frac = |n: usize| {
        if total == 0 {
            0.0
        } else {
            n as f64 / total as f64
        }
    };
    let mrr = (!found.is_empty())
        .then(|| found.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / found.len() as f64);
    Metrics {
        total_questions: total,
        questions_with_correct: found.len(),
        correct_at_rank1: rank1,
        correct_in_top3: top3,
        recall_rank1: frac(rank1),
        recall_top3: frac(top3),
        recall_full: frac(found.len()),
        mrr,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionOutcome {
    pub question: String,
    pub gold: String,
    pub candidates: usize,
    pub first_correct_rank: Option<usize>,
    pub top_answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub metrics: Metrics,
    pub total_candidates: usize,
    pub model: String,
    pub notes: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub questions: Vec<QuestionOutcome>,
    pub runtime_seconds: f64,
}

const FITB_NOTE: &str =
    "fill-in-the-blank answers keep any known text between the first and last blank";

/// Answer every question with a gold answer and measure the results.
/// `workers > 1` answers questions on that many threads; output does not
/// depend on it.
pub fn run_eval(
    questions: &[Question],
    res: &Resources<'_>,
    model: &Model,
    cfg: &PipelineConfig,
    workers: usize,
) -> Result<EvalReport> {
    let start = Instant::now();
    let judged: Vec<&Question> = questions
        .iter()
        .filter(|q| {
            let ok = q
                .gold_answer
                .as_deref()
                .is_some_and(|g| !g.trim().is_empty());
            if !ok {
                warn!("skipping question without a gold answer: {:?}", q.text);
            }
            ok
        })
        .collect();
    let layout = cfg.layout();
    let answer = |q: &Question| -> Result<Vec<CandidateAnswer>> {
        match answer_question_with_layout(q, res, model, cfg, &layout) {
            Err(Error::NoQuery) => {
                warn!("no query terms for {:?}", q.text);
                Ok(Vec::new())
            }
            other => other,
        }
    };
    let ranked = map_in_order(&judged, workers, |q| answer(q))?;

    let mut flags = Vec::with_capacity(judged.len());
    let mut outcomes = Vec::with_capacity(judged.len());
    let mut total_candidates = 0;
    for (q, cands) in judged.iter().zip(&ranked) {
        let gold = q.gold_answer.as_deref().unwrap_or_default();
        let f = mark_correct(cands, gold);
        total_candidates += cands.len();
        outcomes.push(QuestionOutcome {
            question: q.text.clone(),
            gold: gold.to_string(),
            candidates: cands.len(),
            first_correct_rank: first_correct_rank(&f),
            top_answer: cands.first().map(|c| c.answer_text.clone()),
        });
        flags.push(f);
    }
    let mut notes = Vec::new();
    if judged.iter().any(|q| q.category == Category::Fitb) {
        notes.push(FITB_NOTE.to_string());
    }
    Ok(EvalReport {
        metrics: compute_metrics(&flags),
        total_candidates,
        model: model.name().to_string(),
        notes,
        config: BTreeMap::new(),
        questions: outcomes,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Apply `f` to every item on up to `workers` threads, keeping input order.
pub fn map_in_order<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<Result<R>>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    items
                        .iter()
                        .enumerate()
                        .skip(w)
                        .step_by(workers)
                        .map(|(i, item)| (i, f(item)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every slot filled"))
        .collect()
}

fn pct(count: usize, frac: f64) -> String {
    format!("{count} ({:.2}%, {frac:.4})", frac * 100.0)
}

pub const RUNTIME_LABEL: &str = "Total Runtime (seconds)";

/// The results table, one metric per line, followed by notes and the
/// resolved configuration.
pub fn render_table(report: &EvalReport) -> String {
    let m = &report.metrics;
    let rows = [
        ("Recall of Rank 1", pct(m.correct_at_rank1, m.recall_rank1)),
        ("Recall in Top 3", pct(m.correct_in_top3, m.recall_top3)),
        (
            "Recall in Full Candidate Answer Set",
            pct(m.questions_with_correct, m.recall_full),
        ),
        (
            "MRR",
            m.mrr.map_or_else(
                || "undefined (no question has a correct candidate)".to_string(),
                |v| format!("{v:.4}"),
            ),
        ),
        (
            "Questions With A Correct Candidate",
            m.questions_with_correct.to_string(),
        ),
        ("Total Questions", m.total_questions.to_string()),
        (
            "Total Candidate Answers",
            report.total_candidates.to_string(),
        ),
        (RUNTIME_LABEL, format!("{:.4}", report.runtime_seconds)),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    let _ = writeln!(out, "{:<width$}  {}", "Model", report.model);
    for n in &report.notes {
        let _ = writeln!(out, "note: {n}");
    }
    if !report.config.is_empty() {
        let _ = writeln!(out, "config:");
        for (k, v) in &report.config {
            let _ = writeln!(out, "  {k} = {v}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(t: &str) -> CandidateAnswer {
        CandidateAnswer::new(t.to_string())
    }

    #[test]
    fn marking() {
        assert_eq!(
            mark_correct(&[cand("Twain, Mark")], "Mark Twain"),
            vec![true]
        );
        assert_eq!(mark_correct(&[cand("Tempest")], "The Tempest"), vec![true]);
        assert_eq!(
            mark_correct(&[cand("London"), cand("Berlin")], "Paris"),
            vec![false, false]
        );
    }

    #[test]
    fn metrics_example() {
        let flags = vec![
            vec![true, false],
            vec![false, true, false],
            vec![false, false],
        ];
        let m = compute_metrics(&flags);
        assert!((m.recall_rank1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.recall_top3 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall_full - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.mrr.unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(m.questions_with_correct, 2);
    }

    #[test]
    fn metrics_bounds() {
        let all = compute_metrics(&vec![vec![true]; 4]);
        assert_eq!(
            (all.recall_rank1, all.recall_top3, all.recall_full),
            (1.0, 1.0, 1.0)
        );
        assert_eq!(all.mrr, Some(1.0));

        let none = compute_metrics(&[vec![false, false], vec![]]);
        assert_eq!((none.recall_rank1, none.recall_full), (0.0, 0.0));
        assert_eq!(none.mrr, None);

        let empty = compute_metrics(&[]);
        assert_eq!(empty.total_questions, 0);
        assert_eq!(empty.mrr, None);
    }

    #[test]
    fn rank_four_counts_only_for_full_recall() {
        let m = compute_metrics(&[vec![false, false, false, true]]);
        assert_eq!(
            (
                m.correct_at_rank1,
                m.correct_in_top3,
                m.questions_with_correct
            ),
            (0, 0, 1)
        );
        assert_eq!(m.mrr, Some(0.25));
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<u32> = (0..37).collect();
        let out = map_in_order(&items, 4, |&x| Ok(x * 2)).unwrap();
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        let err = map_in_order(
            &items,
            3,
            |&x| if x == 5 { Err(Error::NoQuery) } else { Ok(x) },
        );
        assert!(err.is_err());
    }

    #[test]
    fn table_mentions_every_metric() {
        let report = EvalReport {
            metrics: compute_metrics(&[vec![true], vec![false, true], vec![]]),
            total_candidates: 3,
            model: "uniform".into(),
            notes: vec![],
            config: BTreeMap::from([("mu".to_string(), "2000".to_string())]),
            questions: vec![],
            runtime_seconds: 0.5,
        };
        let t = render_table(&report);
        for needle in [
            "Recall of Rank 1",
            "1 (33.33%, 0.3333)",
            "Recall in Top 3",
            "2 (66.67%, 0.6667)",
            "MRR",
            "0.7500",
            "Total Questions",
            "Total Candidate Answers",
            "Total Runtime (seconds)",
            "0.5000",
            "mu = 2000",
        ] {
            assert!(t.contains(needle), "missing {needle:?} in\n{t}");
        }
    }

    #[test]
    fn question_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.jsonl");
        std::fs::write(
            &p,
            "{\"question\": \"Who wrote Hamlet?\", \"answer\": \"Shakespeare\"}\n\
             {\"question\": \"plain clue\", \"answer\": null, \"category\": \"FITB\"}\n\
             {\"question\": \"To ___ or not\"}\n",
        )
        .unwrap();
        let qs = load_questions(&p).unwrap();
        assert_eq!(qs.len(), 3);
        assert_eq!(qs[0].category, Category::Factoid);
        assert_eq!(qs[1].category, Category::Fitb);
        assert_eq!(qs[2].category, Category::Fitb);
        std::fs::write(&p, "{\"question\": \"x\", \"category\": \"QUOTE\"}\n").unwrap();
        assert!(matches!(
            load_questions(&p),
            Err(Error::Malformed { line: 1, .. })
        ));
    }
}
