use std::collections::HashMap;

use super::{top_k, EngineId, InvertedIndex, Query, SearchResult, UnitId};

/// TF-IDF vector-space ranking.
///
/// Each clause adds `weight * tf * ln(N / df) / norm(unit)` in its field,
/// where `norm` is the Euclidean length of the unit's tf-idf vector there.
/// Units scoring zero are omitted.
pub fn search_vsm(index: &InvertedIndex, query: &Query, k: usize) -> Vec<SearchResult> {
    let mut acc: HashMap<UnitId, f64> = HashMap::new();
    for clause in query.clauses() {
        let field = index.field(clause.field);
        let postings = field.postings(&clause.term);
        if postings.is_empty() || clause.weight == 0.0 {
            continue;
        }
        let idf = (field.units() as f64 / postings.len() as f64).ln();
        if idf <= 0.0 {
            continue;
        }
        for &(unit, tf) in postings {
            let norm = field.norm(unit);
            *acc.entry(unit).or_insert(0.0) += clause.weight * tf as f64 * idf / norm;
        }
    }
    let scored = acc.into_iter().filter(|&(_, s)| s > 0.0).collect();
    top_k(index, EngineId::Vsm, query.targets_passages(), scored, k)
}
