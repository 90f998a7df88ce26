//! Text analysis: tokenization, stopword removal, Porter stemming, n-grams
//! and the token-set equality used to judge answers.

mod porter;
mod stopwords;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use porter::stem;
pub use stopwords::{is_stopword, STOPWORDS, STOPWORDS_VERSION};

/// An analyzed term with the byte span it came from in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub term: String,
    pub start: usize,
    pub end: usize,
}

/// Ordered, stemmed, lowercased terms with stopwords removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn term_set(&self) -> BTreeSet<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }

    pub fn extend(&mut self, other: &TokenStream) {
        self.tokens.extend_from_slice(&other.tokens);
    }
}

impl fmt::Display for TokenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

impl From<Vec<Token>> for TokenStream {
    fn from(tokens: Vec<Token>) -> Self {
        Self::new(tokens.into_iter().map(|t| t.term).collect())
    }
}

/// Lowercase, split on non-alphanumeric runs, drop stopwords, Porter-stem.
pub fn analyze(text: &str) -> TokenStream {
    analyze_with_offsets(text).into()
}

/// As [`analyze`], keeping the source byte span of every surviving token.
pub fn analyze_with_offsets(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut word = String::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if word.is_empty() {
                start = i;
            }
            for lc in c.to_lowercase() {
                fold_into(lc, &mut word);
            }
        } else if !word.is_empty() {
            push_term(&mut out, &mut word, start, i);
        }
    }
    if !word.is_empty() {
        push_term(&mut out, &mut word, start, text.len());
    }
    out
}

fn push_term(out: &mut Vec<Token>, word: &mut String, start: usize, end: usize) {
    let raw = std::mem::take(word);
    if is_stopword(&raw) {
        return;
    }
    let term = stem(&raw);
    // A stem can land on a stopword ("being" -> "be").
    if term.is_empty() || is_stopword(&term) {
        return;
    }
    out.push(Token { term, start, end });
}

/// Fold common Latin accented letters onto ASCII.
fn fold_into(c: char, out: &mut String) {
    let folded = match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' => "a",
        'æ' => "ae",
        'ç' | 'ć' | 'č' => "c",
        'ď' | 'đ' | 'ð' => "d",
        'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ė' | 'ę' | 'ě' => "e",
        'ì' | 'í' | 'î' | 'ï' | 'ī' | 'į' | 'ı' => "i",
        'ł' | 'ľ' | 'ĺ' => "l",
        'ñ' | 'ń' | 'ň' => "n",
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ő' => "o",
        'œ' => "oe",
        'ř' | 'ŕ' => "r",
        'ś' | 'š' | 'ş' => "s",
        'ß' => "ss",
        'ť' | 'ţ' => "t",
        'þ' => "th",
        'ù' | 'ú' | 'û' | 'ü' | 'ū' | 'ů' | 'ű' | 'ų' => "u",
        'ý' | 'ÿ' => "y",
        'ź' | 'ż' | 'ž' => "z",
        _ => {
            out.push(c);
            return;
        }
    };
    out.push_str(folded);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NGramKind {
    Unigram,
    Bigram,
    SkipBigram,
    Trigram,
}

impl NGramKind {
    pub const ALL: [NGramKind; 4] = [
        NGramKind::Unigram,
        NGramKind::Bigram,
        NGramKind::SkipBigram,
        NGramKind::Trigram,
    ];

    pub fn arity(self) -> usize {
        match self {
            NGramKind::Unigram => 1,
            NGramKind::Bigram | NGramKind::SkipBigram => 2,
            NGramKind::Trigram => 3,
        }
    }

    /// Number of source positions a gram spans.
    fn span(self) -> usize {
        match self {
            NGramKind::Unigram => 1,
            NGramKind::Bigram => 2,
            NGramKind::SkipBigram | NGramKind::Trigram => 3,
        }
    }
}

/// A multiset of n-grams of one kind, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramBag<'a> {
    pub kind: NGramKind,
    pub grams: Vec<Vec<&'a str>>,
}

impl<'a> NGramBag<'a> {
    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn distinct(&self) -> HashSet<&[&'a str]> {
        self.grams.iter().map(Vec::as_slice).collect()
    }
}

/// Unigrams, adjacent bigrams, skip-one bigrams `(t[i], t[i+2])` or trigrams.
pub fn extract_ngrams(stream: &TokenStream, kind: NGramKind) -> NGramBag<'_> {
    let toks: Vec<&str> = stream.tokens.iter().map(String::as_str).collect();
    let grams = toks
        .windows(kind.span())
        .map(|w| match kind {
            NGramKind::SkipBigram => vec![w[0], w[2]],
            _ => w.to_vec(),
        })
        .collect();
    NGramBag { kind, grams }
}

/// True iff both texts analyze to the same set of terms. Two texts that
/// both analyze to nothing match.
pub fn token_set_match(a: &str, b: &str) -> bool {
    analyze(a).term_set() == analyze(b).term_set()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(words: &[&str]) -> TokenStream {
        TokenStream::new(words.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn analyze_examples() {
        assert_eq!(analyze("The cats are running"), ts(&["cat", "run"]));
        assert_eq!(analyze(""), ts(&[]));
        assert_eq!(analyze("Paris"), ts(&["pari"]));
        assert_eq!(analyze("Who wrote Hamlet?"), ts(&["wrote", "hamlet"]));
    }

    #[test]
    fn digits_are_token_characters() {
        assert_eq!(analyze("R2-D2 in 1977"), ts(&["r2", "d2", "1977"]));
    }

    #[test]
    fn accents_fold_to_ascii() {
        assert_eq!(analyze("Café Zoë"), analyze("cafe zoe"));
    }

    #[test]
    fn offsets_point_at_source_words() {
        let text = "The Quick, brown foxes!";
        let toks = analyze_with_offsets(text);
        let spans: Vec<&str> = toks.iter().map(|t| &text[t.start..t.end]).collect();
        assert_eq!(spans, ["Quick", "brown", "foxes"]);
        assert_eq!(toks[2].term, "fox");
    }

    #[test]
    fn stems_that_become_stopwords_are_dropped() {
        assert!(analyze("being").is_empty());
    }

    #[test]
    fn ngram_examples() {
        let s = ts(&["a", "b", "c", "d"]);
        let bi = extract_ngrams(&s, NGramKind::Bigram);
        assert_eq!(
            bi.grams,
            vec![vec!["a", "b"], vec!["b", "c"], vec!["c", "d"]]
        );
        let skip = extract_ngrams(&s, NGramKind::SkipBigram);
        assert_eq!(skip.grams, vec![vec!["a", "c"], vec!["b", "d"]]);
        assert!(extract_ngrams(&ts(&["a", "b"]), NGramKind::Trigram).is_empty());
        assert_eq!(extract_ngrams(&s, NGramKind::Unigram).len(), 4);
    }

    #[test]
    fn token_set_match_examples() {
        assert!(token_set_match("Mark Twain", "Twain, Mark"));
        assert!(token_set_match("The Tempest", "Tempest"));
        assert!(!token_set_match("Paris", "London"));
        assert!(token_set_match("the", "of a"));
        assert!(!token_set_match("the", "Paris"));
    }
}
