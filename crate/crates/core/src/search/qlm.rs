use std::collections::BTreeMap;

use super::{top_k, EngineId, InvertedIndex, Query, SearchResult, UnitId};

/// Dirichlet-smoothed query likelihood.
///
/// `score = sum weight * ln((tf + mu * P(t|C)) / (|u| + mu))` over clauses
/// whose term occurs somewhere in the clause's field. Only units containing
/// at least one such term are ranked.
pub fn search_qlm(index: &InvertedIndex, query: &Query, k: usize, mu: f64) -> Vec<SearchResult> {
    struct Active<'a> {
        clause: &'a super::Clause,
        background: f64,
    }
    let active: Vec<Active> = query
        .clauses()
        .iter()
        .filter_map(|clause| {
            let field = index.field(clause.field);
            let cf = field.collection_tf(&clause.term);
            (cf > 0).then(|| Active {
                clause,
                background: mu * cf as f64 / field.total_terms() as f64,
            })
        })
        .collect();

    // Per candidate unit, the summed log-ratio of the matched clauses.
    let mut matched: BTreeMap<UnitId, f64> = BTreeMap::new();
    for a in &active {
        let field = index.field(a.clause.field);
        for &(unit, tf) in field.postings(&a.clause.term) {
            let gain = ((tf as f64 + a.background) / a.background).ln();
            *matched.entry(unit).or_insert(0.0) += a.clause.weight * gain;
        }
    }

    let scored = matched
        .into_iter()
        .map(|(unit, gain)| {
            let base: f64 = active
                .iter()
                .map(|a| {
                    let len = index.field(a.clause.field).unit_len(unit) as f64;
                    a.clause.weight * (a.background / (len + mu)).ln()
                })
                .sum();
            (unit, base + gain)
        })
        .collect();
    top_k(index, EngineId::Qlm, query.targets_passages(), scored, k)
}
