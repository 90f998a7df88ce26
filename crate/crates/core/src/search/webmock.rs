use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EngineId, InvertedIndex, Query, SearchResult};
use crate::analysis::analyze;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebMockHit {
    pub title: String,
    #[serde(default)]
    pub text: String,
}

/// One fixture line: canned results, in rank order, for a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebMockEntry {
    pub query_terms: Vec<String>,
    pub results: Vec<WebMockHit>,
}

/// Offline stand-in for a remote web search engine: answers from a fixture
/// file keyed by the query's normalized term list and reports ranks only.
#[derive(Debug, Clone, Default)]
pub struct WebMock {
    entries: HashMap<Vec<String>, Vec<WebMockHit>>,
}

fn normalize<S: AsRef<str>>(terms: &[S]) -> Vec<String> {
    let joined = terms
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(" ");
    let mut out: Vec<String> = Vec::new();
    for t in analyze(&joined).tokens() {
        if !out.contains(t) {
            out.push(t.clone());
        }
    }
    out
}

impl WebMock {
    pub fn from_entries(entries: impl IntoIterator<Item = WebMockEntry>) -> Self {
        let mut map = HashMap::new();
        for e in entries {
            // Later lines for the same key replace earlier ones.
            map.insert(normalize(&e.query_terms), e.results);
        }
        Self { entries: map }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: WebMockEntry =
                serde_json::from_str(&line).map_err(|e| Error::Malformed {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
            entries.push(entry);
        }
        Ok(Self::from_entries(entries))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The canned results for `query`, truncated to `k`. Titles that name
    /// an indexed document (directly or by synonym) carry its id.
    pub fn search(
        &self,
        query: &Query,
        k: usize,
        index: Option<&InvertedIndex>,
    ) -> Vec<SearchResult> {
        let key = query.normalized_terms();
        let Some(hits) = self.entries.get(&key) else {
            return Vec::new();
        };
        hits.iter()
            .take(k)
            .enumerate()
            .map(|(i, hit)| SearchResult {
                engine: EngineId::Webmock,
                unit_id: i as u32,
                doc_id: index.and_then(|idx| idx.lookup_title(&hit.title)),
                title: hit.title.clone(),
                text: hit.text.clone(),
                rank: i as u32 + 1,
                native_score: None,
            })
            .collect()
    }
}

/// Load the fixture at `fixture_path` and answer a single query from it.
pub fn search_webmock(fixture_path: &Path, query: &Query, k: usize) -> Result<Vec<SearchResult>> {
    Ok(WebMock::load(fixture_path)?.search(query, k, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::Field;
    use std::io::Write;

    fn fixture(n: usize, terms: &[&str]) -> WebMockEntry {
        WebMockEntry {
            query_terms: terms.iter().map(|s| s.to_string()).collect(),
            results: (0..n)
                .map(|i| WebMockHit {
                    title: format!("Hit {i}"),
                    text: format!("snippet {i}"),
                })
                .collect(),
        }
    }

    fn query(text: &str) -> Query {
        let toks = analyze(text);
        Query::from_terms(toks.tokens(), &[(Field::Content, 1.0), (Field::Title, 0.3)]).unwrap()
    }

    #[test]
    fn truncates_and_has_no_scores() {
        let mock = WebMock::from_entries([fixture(7, &["wrote", "hamlet"])]);
        let res = mock.search(&query("Who wrote Hamlet?"), 5, None);
        assert_eq!(res.len(), 5);
        assert_eq!(
            res.iter().map(|r| r.rank).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
        assert!(res.iter().all(|r| r.native_score.is_none()));
    }

    #[test]
    fn fixture_terms_are_normalized() {
        let mock = WebMock::from_entries([fixture(3, &["Wrote", "Hamlets"])]);
        assert_eq!(mock.search(&query("wrote hamlet"), 10, None).len(), 3);
    }

    #[test]
    fn unseen_query_is_empty() {
        let mock = WebMock::from_entries([fixture(3, &["x"])]);
        assert!(mock.search(&query("something else"), 10, None).is_empty());
    }

    #[test]
    fn per_engine_cap_applies() {
        let mock = WebMock::from_entries([fixture(60, &["bing"])]);
        let cap = crate::search::EngineCaps::default().webmock;
        assert_eq!(mock.search(&query("bing"), cap, None).len(), 50);
    }

    #[test]
    fn load_from_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "{}",
            serde_json::to_string(&fixture(2, &["zebra"])).unwrap()
        )
        .unwrap();
        let res = search_webmock(f.path(), &query("zebra"), 10).unwrap();
        assert_eq!(res.len(), 2);
        assert!(search_webmock(Path::new("/no/such/fixture"), &query("zebra"), 1).is_err());
    }
}
