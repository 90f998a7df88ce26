use std::collections::BTreeMap;

use super::{EngineConfig, EngineId, SearchResult};

/// Truncate each engine's list to its cap, then interleave the lists
/// round-robin in engine order and truncate to the total cap. Hits on the
/// same unit from different engines stay separate entries.
pub fn fuse_results(
    lists: &BTreeMap<EngineId, Vec<SearchResult>>,
    cfg: &EngineConfig,
) -> Vec<SearchResult> {
    let capped: Vec<&[SearchResult]> = lists
        .iter()
        .map(|(&engine, list)| {
            let cap = if cfg.caps_enabled {
                cfg.caps.for_engine(engine)
            } else {
                usize::MAX
            };
            &list[..list.len().min(cap)]
        })
        .collect();
    let total = if cfg.caps_enabled {
        cfg.caps.total
    } else {
        usize::MAX
    };
    let longest = capped.iter().map(|l| l.len()).max().unwrap_or(0);
    let mut out = Vec::new();
    'outer: for i in 0..longest {
        for list in &capped {
            if let Some(r) = list.get(i) {
                if out.len() >= total {
                    break 'outer;
                }
                out.push(r.clone());
            }
        }
    }
    out
}
