/// Stopword list version. Bump whenever [`STOPWORDS`] changes: correctness
/// judgements depend on it.
pub const STOPWORDS_VERSION: u32 = 1;

/// English stopwords. The first block is the classic 33-word
/// retrieval stoplist; the second adds question words, pronouns and
/// auxiliaries that otherwise dominate trivia clues.
pub const STOPWORDS: &[&str] = &[
    // classic retrieval stoplist
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "if", "in", "into", "is", "it",
    "no", "not", "of", "on", "or", "such", "that", "the", "their", "then", "there", "these",
    "they", "this", "to", "was", "will", "with", // additions
    "been", "being", "can", "could", "did", "do", "does", "from", "had", "has", "have", "he", "her",
    "him", "his", "how", "i", "its", "me", "my", "our", "s", "she", "should", "so", "t", "than",
    "them", "too", "very", "we", "were", "what", "when", "where", "which", "who", "whom", "whose",
    "why", "would", "you", "your",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_classic_list() {
        let classic = "a an and are as at be but by for if in into is it no not of on or such \
                       that the their then there these they this to was will with";
        for w in classic.split_whitespace() {
            assert!(is_stopword(w), "{w}");
        }
    }

    #[test]
    fn no_duplicates() {
        let mut v = STOPWORDS.to_vec();
        v.sort_unstable();
        v.dedup();
        assert_eq!(v.len(), STOPWORDS.len());
    }
}
