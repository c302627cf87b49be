//! CoNLL-U reading and writing.
//!
//! Multiword-token ranges (`3-4`) and empty nodes (`3.1`) are kept so that a
//! treebank round-trips through [`write_conllu`], but they are never part of
//! trees, lengths or attachment scores. Only syntactic words (integer ids)
//! are analysed.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Number of tab-separated columns in a token line.
pub const COLUMNS: usize = 10;

/// Identifier of a token line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenId {
    /// A syntactic word, `1..=n`.
    Word(usize),
    /// A multiword-token range such as `3-4`.
    Range(usize, usize),
    /// An empty node such as `3.1`.
    Empty(usize, usize),
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TokenId::Word(id) => write!(f, "{}", id),
            TokenId::Range(start, end) => write!(f, "{}-{}", start, end),
            TokenId::Empty(word, index) => write!(f, "{}.{}", word, index),
        }
    }
}

fn parse_token_id(field: &str) -> Option<TokenId> {
    fn int(s: &str) -> Option<usize> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    }

    if let Some((start, end)) = field.split_once('-') {
        Some(TokenId::Range(int(start)?, int(end)?))
    } else if let Some((word, index)) = field.split_once('.') {
        Some(TokenId::Empty(int(word)?, int(index)?))
    } else {
        int(field).map(TokenId::Word)
    }
}

/// One token line. Columns other than ID and HEAD are kept verbatim,
/// including `_` placeholders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub id: TokenId,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// `None` when the column is `_`; always `Some` for syntactic words.
    pub head: Option<usize>,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// A syntactic word with placeholder columns.
    pub fn word(id: usize, form: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        Token {
            id: TokenId::Word(id),
            form: form.into(),
            lemma: "_".to_owned(),
            upos: "_".to_owned(),
            xpos: "_".to_owned(),
            feats: "_".to_owned(),
            head: Some(head),
            deprel: deprel.into(),
            deps: "_".to_owned(),
            misc: "_".to_owned(),
        }
    }

    /// A multiword-token range line covering words `start..=end`.
    pub fn range(start: usize, end: usize, form: impl Into<String>) -> Self {
        Token {
            id: TokenId::Range(start, end),
            head: None,
            deprel: "_".to_owned(),
            ..Token::word(0, form, 0, "_")
        }
    }

    /// An empty node `word.index`.
    pub fn empty_node(word: usize, index: usize, form: impl Into<String>) -> Self {
        Token {
            id: TokenId::Empty(word, index),
            head: None,
            deprel: "_".to_owned(),
            ..Token::word(0, form, 0, "_")
        }
    }

    pub fn is_word(&self) -> bool {
        matches!(self.id, TokenId::Word(_))
    }

    pub fn is_mwt_range(&self) -> bool {
        matches!(self.id, TokenId::Range(..))
    }

    pub fn is_empty_node(&self) -> bool {
        matches!(self.id, TokenId::Empty(..))
    }

    /// Dependency relation without its language-specific subtype
    /// (`nsubj:pass` becomes `nsubj`).
    pub fn deprel_base(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }

    /// Punctuation by UPOS tag or by relation.
    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT" || self.deprel_base() == "punct"
    }

    fn write_line(&self, out: &mut String) {
        use fmt::Write;

        let head = match self.head {
            Some(h) => h.to_string(),
            None => "_".to_owned(),
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id, self.form, self.lemma, self.upos, self.xpos, self.feats, head, self.deprel, self.deps, self.misc
        );
    }
}

/// Which syntactic words take part in lengths, trees and scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WordFilter {
    #[default]
    All,
    /// Drop punctuation words; their dependents are re-attached to the
    /// nearest non-punctuation ancestor when trees are built.
    ExcludePunct,
}

impl WordFilter {
    pub fn keeps(self, token: &Token) -> bool {
        token.is_word() && (self == WordFilter::All || !token.is_punct())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    /// Comment lines without the leading `#`.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            comments: Vec::new(),
            tokens,
        }
    }

    /// Sentence from a head vector; word `i + 1` is attached to `heads[i]`.
    /// Every relation is `dep`.
    pub fn from_heads(heads: &[usize]) -> Self {
        let tokens = heads
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let deprel = if h == 0 { "root" } else { "dep" };
                Token::word(i + 1, format!("w{}", i + 1), h, deprel)
            })
            .collect();
        Sentence::new(tokens)
    }

    /// Value of a `# sent_id = ...` comment, if present.
    pub fn sent_id(&self) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (key, value) = c.split_once('=')?;
            (key.trim() == "sent_id").then(|| value.trim())
        })
    }

    /// Syntactic words in id order.
    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.is_word())
    }

    /// Number of syntactic words.
    pub fn len(&self) -> usize {
        self.words().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of words kept by `filter`.
    pub fn filtered_len(&self, filter: WordFilter) -> usize {
        self.tokens.iter().filter(|t| filter.keeps(t)).count()
    }

    /// Checks the word-level invariants: ids `1..=n`, heads in `0..=n`,
    /// no self-attachment, ranges inside the sentence.
    pub fn validate(&self) -> Result<(), ParseErrorKind> {
        self.check(|_| 0).map_err(|(_, kind)| kind)
    }

    fn check(&self, line_of: impl Fn(usize) -> usize) -> Result<(), (usize, ParseErrorKind)> {
        let mut expected = 1;
        for (i, token) in self.tokens.iter().enumerate() {
            match token.id {
                TokenId::Word(id) => {
                    if id != expected {
                        return Err((line_of(i), ParseErrorKind::NonContiguousIds { expected, found: id }));
                    }
                    expected += 1;
                }
                TokenId::Range(start, end) if start == 0 || start > end => {
                    return Err((line_of(i), ParseErrorKind::InvalidRange { start, end }));
                }
                _ => {}
            }
        }

        let n = expected - 1;
        for (i, token) in self.tokens.iter().enumerate() {
            match token.id {
                TokenId::Word(id) => match token.head {
                    None => return Err((line_of(i), ParseErrorKind::MissingHead)),
                    Some(head) if head > n => {
                        return Err((line_of(i), ParseErrorKind::HeadOutOfRange { head, len: n }));
                    }
                    Some(head) if head == id => {
                        return Err((line_of(i), ParseErrorKind::SelfAttachment(id)));
                    }
                    _ => {}
                },
                TokenId::Range(start, end) if end > n => {
                    return Err((line_of(i), ParseErrorKind::InvalidRange { start, end }));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Number of syntactic words in `sentence`; MWT ranges and empty nodes are
/// not counted.
pub fn sentence_length(sentence: &Sentence) -> usize {
    sentence.len()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Treebank {
    pub name: String,
    pub sentences: Vec<Sentence>,
}

impl Treebank {
    pub fn new(name: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Treebank {
            name: name.into(),
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Copy holding only sentences whose filtered length lies in `lo..=hi`.
    pub fn restrict_lengths(&self, lo: usize, hi: usize, filter: WordFilter) -> Treebank {
        let sentences = self
            .sentences
            .iter()
            .filter(|s| (lo..=hi).contains(&s.filtered_len(filter)))
            .cloned()
            .collect();
        Treebank::new(self.name.clone(), sentences)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot compute a mean length over an empty treebank")]
pub struct EmptyTreebank;

/// Arithmetic mean of the sentence lengths (syntactic words).
pub fn mean_test_length(tb: &Treebank) -> Result<f64, EmptyTreebank> {
    mean_length(tb, WordFilter::All)
}

pub fn mean_length(tb: &Treebank, filter: WordFilter) -> Result<f64, EmptyTreebank> {
    if tb.is_empty() {
        return Err(EmptyTreebank);
    }
    let total: usize = tb.sentences.iter().map(|s| s.filtered_len(filter)).sum();
    Ok(total as f64 / tb.len() as f64)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected {COLUMNS} tab-separated columns, found {0}")]
    ColumnCount(usize),
    #[error("invalid token id {0:?}")]
    InvalidId(String),
    #[error("non-contiguous ids: expected word {expected}, found {found}")]
    NonContiguousIds { expected: usize, found: usize },
    #[error("invalid multiword range {start}-{end}")]
    InvalidRange { start: usize, end: usize },
    #[error("invalid head {0:?}")]
    InvalidHead(String),
    #[error("syntactic word without a head")]
    MissingHead,
    #[error("head {head} out of range for a sentence of {len} words")]
    HeadOutOfRange { head: usize, len: usize },
    #[error("word {0} is attached to itself")]
    SelfAttachment(usize),
    #[error("comment line inside a sentence")]
    CommentInsideSentence,
    #[error("sentence without token lines")]
    EmptySentence,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
}

#[derive(Default)]
struct PendingSentence {
    sentence: Sentence,
    lines: Vec<usize>,
    first_line: usize,
}

impl PendingSentence {
    fn is_blank(&self) -> bool {
        self.sentence.comments.is_empty() && self.sentence.tokens.is_empty()
    }

    fn finish(self) -> Result<Sentence, ParseError> {
        if self.sentence.tokens.is_empty() {
            return Err(ParseError {
                line: self.first_line,
                kind: ParseErrorKind::EmptySentence,
            });
        }
        let lines = &self.lines;
        self.sentence
            .check(|i| lines[i])
            .map_err(|(line, kind)| ParseError { line, kind })?;
        Ok(self.sentence)
    }
}

fn parse_token(line: &str) -> Result<Token, ParseErrorKind> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != COLUMNS {
        return Err(ParseErrorKind::ColumnCount(fields.len()));
    }

    let id = parse_token_id(fields[0]).ok_or_else(|| ParseErrorKind::InvalidId(fields[0].to_owned()))?;
    let head = match fields[6] {
        "_" => None,
        h => Some(h.parse().map_err(|_| ParseErrorKind::InvalidHead(h.to_owned()))?),
    };

    Ok(Token {
        id,
        form: fields[1].to_owned(),
        lemma: fields[2].to_owned(),
        upos: fields[3].to_owned(),
        xpos: fields[4].to_owned(),
        feats: fields[5].to_owned(),
        head,
        deprel: fields[7].to_owned(),
        deps: fields[8].to_owned(),
        misc: fields[9].to_owned(),
    })
}

/// Parses CoNLL-U text. CRLF line endings are accepted.
pub fn parse_conllu(name: impl Into<String>, text: &str) -> Result<Treebank, ParseError> {
    let mut sentences = Vec::new();
    let mut pending = PendingSentence::default();

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);

        if line.trim().is_empty() {
            if !pending.is_blank() {
                sentences.push(std::mem::take(&mut pending).finish()?);
            }
            continue;
        }

        if pending.is_blank() {
            pending.first_line = line_no;
        }

        if let Some(comment) = line.strip_prefix('#') {
            if !pending.sentence.tokens.is_empty() {
                return Err(ParseError {
                    line: line_no,
                    kind: ParseErrorKind::CommentInsideSentence,
                });
            }
            pending.sentence.comments.push(comment.to_owned());
            continue;
        }

        let token = parse_token(line).map_err(|kind| ParseError { line: line_no, kind })?;
        pending.sentence.tokens.push(token);
        pending.lines.push(line_no);
    }

    if !pending.is_blank() {
        sentences.push(pending.finish()?);
    }

    Ok(Treebank::new(name, sentences))
}

/// Reads and parses a CoNLL-U file; the treebank is named after the file stem.
pub fn read_conllu(path: impl AsRef<Path>) -> Result<Treebank, ReadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: path.to_owned(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_conllu(name, &text).map_err(|source| ReadError::Parse {
        path: path.to_owned(),
        source,
    })
}

/// Serializes a treebank. Every sentence, including the last, is followed
/// by a blank line.
pub fn write_conllu(tb: &Treebank) -> String {
    let mut out = String::new();
    for sentence in &tb.sentences {
        for comment in &sentence.comments {
            out.push('#');
            out.push_str(comment);
            out.push('\n');
        }
        for token in &sentence.tokens {
            token.write_line(&mut out);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SENTENCES: &str = "# sent_id = s1\n\
# text = Hello world\n\
1\tHello\thello\tINTJ\t_\t_\t0\troot\t_\t_\n\
2\tworld\tworld\tNOUN\t_\t_\t1\tvocative\t_\tSpaceAfter=No\n\
3\t!\t!\tPUNCT\t_\t_\t1\tpunct\t_\t_\n\
\n\
# sent_id = s2\n\
1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tde\tde\tADP\t_\t_\t2\tcase\t_\t_\n\
2\tel\tel\tDET\t_\t_\t0\troot\t_\t_\n\
2.1\tsub\t_\t_\t_\t_\t_\t_\t0:root\t_\n\
\n";

    #[test]
    fn parses_two_sentences() {
        let tb = parse_conllu("t", TWO_SENTENCES).unwrap();
        assert_eq!(tb.len(), 2);
        assert_eq!(tb.sentences[0].sent_id(), Some("s1"));
        assert_eq!(tb.sentences[0].len(), 3);
        assert_eq!(tb.sentences[1].tokens.len(), 4);
        assert!(tb.sentences[1].tokens[0].is_mwt_range());
        assert!(tb.sentences[1].tokens[3].is_empty_node());
        assert_eq!(tb.sentences[1].tokens[0].head, None);
    }

    #[test]
    fn mwt_and_empty_rows_do_not_count() {
        let tb = parse_conllu("t", TWO_SENTENCES).unwrap();
        assert_eq!(sentence_length(&tb.sentences[1]), 2);
    }

    #[test]
    fn lengths_of_constructed_sentences() {
        assert_eq!(sentence_length(&Sentence::from_heads(&[0, 1, 1, 1, 1])), 5);
        let mut s = Sentence::from_heads(&[0, 1]);
        s.tokens.insert(0, Token::range(1, 2, "ab"));
        assert_eq!(sentence_length(&s), 2);
        assert_eq!(sentence_length(&Sentence::default()), 0);
    }

    #[test]
    fn round_trips_byte_identically() {
        let tb = parse_conllu("t", TWO_SENTENCES).unwrap();
        assert_eq!(write_conllu(&tb), TWO_SENTENCES);
    }

    #[test]
    fn crlf_is_normalized() {
        let crlf = TWO_SENTENCES.replace('\n', "\r\n");
        let tb = parse_conllu("t", &crlf).unwrap();
        assert_eq!(write_conllu(&tb), TWO_SENTENCES);
    }

    #[test]
    fn missing_final_blank_line_is_accepted() {
        let text = "1\ta\t_\t_\t_\t_\t0\troot\t_\t_";
        let tb = parse_conllu("t", text).unwrap();
        assert_eq!(tb.len(), 1);
    }

    #[test]
    fn empty_treebank_writes_nothing() {
        assert_eq!(write_conllu(&Treebank::default()), "");
        assert!(parse_conllu("t", "").unwrap().is_empty());
    }

    fn err(text: &str) -> ParseError {
        parse_conllu("t", text).unwrap_err()
    }

    #[test]
    fn rejects_gaps_in_ids() {
        let e = err("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n3\tb\t_\t_\t_\t_\t1\tdep\t_\t_\n\n");
        assert_eq!(e.line, 2);
        assert_eq!(e.kind, ParseErrorKind::NonContiguousIds { expected: 2, found: 3 });
        assert!(e.to_string().contains("non-contiguous ids"));
    }

    #[test]
    fn rejects_wrong_column_count() {
        let e = err("# c\n1\ta\t_\t_\t_\t_\t0\troot\t_\n\n");
        assert_eq!(
            e,
            ParseError {
                line: 2,
                kind: ParseErrorKind::ColumnCount(9)
            }
        );
    }

    #[test]
    fn rejects_head_out_of_range() {
        let e = err("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n2\tb\t_\t_\t_\t_\t5\tdep\t_\t_\n\n");
        assert_eq!(e.line, 2);
        assert_eq!(e.kind, ParseErrorKind::HeadOutOfRange { head: 5, len: 2 });
    }

    #[test]
    fn rejects_malformed_corpus() {
        let corpus = [
            ("x\ta\t_\t_\t_\t_\t0\troot\t_\t_\n", 1),
            ("1\ta\t_\t_\t_\t_\tx\troot\t_\t_\n", 1),
            ("1\ta\t_\t_\t_\t_\t_\troot\t_\t_\n", 1),
            ("1\ta\t_\t_\t_\t_\t1\troot\t_\t_\n", 1),
            ("\n\n2\ta\t_\t_\t_\t_\t0\troot\t_\t_\n", 3),
            ("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n# late\n", 2),
            ("# only a comment\n\n", 1),
            ("3-2\tab\t_\t_\t_\t_\t_\t_\t_\t_\n1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n", 1),
            ("1-3\tab\t_\t_\t_\t_\t_\t_\t_\t_\n1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n", 1),
            ("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\t_\n", 1),
        ];
        for (text, line) in corpus {
            let e = err(text);
            assert_eq!(e.line, line, "{:?} -> {}", text, e);
            assert!(e.to_string().starts_with(&format!("line {}:", line)));
        }
    }

    #[test]
    fn mean_lengths() {
        let tb = |lens: &[usize]| {
            Treebank::new(
                "t",
                lens.iter()
                    .map(|&n| Sentence::from_heads(&(0..n).collect::<Vec<_>>()))
                    .collect(),
            )
        };
        assert_eq!(mean_test_length(&tb(&[4, 6])).unwrap(), 5.0);
        assert_eq!(mean_test_length(&tb(&[12])).unwrap(), 12.0);
        assert_eq!(mean_test_length(&tb(&[3, 4, 5, 20])).unwrap(), 8.0);
        assert_eq!(mean_test_length(&Treebank::default()), Err(EmptyTreebank));
    }

    #[test]
    fn punct_filter() {
        let tb = parse_conllu("t", TWO_SENTENCES).unwrap();
        assert_eq!(tb.sentences[0].filtered_len(WordFilter::ExcludePunct), 2);
        assert_eq!(mean_length(&tb, WordFilter::ExcludePunct).unwrap(), 2.0);
    }

    #[test]
    fn deprel_subtypes() {
        let mut t = Token::word(1, "a", 0, "nsubj:pass");
        assert_eq!(t.deprel_base(), "nsubj");
        t.deprel = "obj".into();
        assert_eq!(t.deprel_base(), "obj");
    }
}
