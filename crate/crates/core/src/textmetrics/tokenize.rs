use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

/// Word tokens. By construction no token is empty or contains whitespace.
pub type TokenSequence = Vec<String>;

/// Canonical Unicode form applied before any tokenization or character
/// n-gram extraction, so byte-different encodings of the same text score
/// identically.
pub fn normalize_nfc(text: &str) -> String {
    text.nfc().collect()
}

// The 13a rule sequence. Rule order matters: symbols first, then the
// digit-guarded period/comma rules, then digit-hyphen.
static RULE_SYMBOLS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"([\x{7b}-\x{7e}\x{5b}-\x{60}\x{20}-\x{26}\x{28}-\x{2b}\x{3a}-\x{40}/])").unwrap()
});
static RULE_PERIOD_AFTER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([^0-9])([\.,])").unwrap());
static RULE_PERIOD_BEFORE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"([\.,])([^0-9])").unwrap());
static RULE_DIGIT_HYPHEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"([0-9])(-)").unwrap());

/// Language-agnostic word tokenizer: NFC normalization, the standard
/// mteval-style substitutions, then punctuation splitting. Periods and
/// commas stay attached between digits ("3.5" is one token).
pub fn tokenize_13a(text: &str) -> TokenSequence {
    let mut line = normalize_nfc(text);
    line = line.replace("<skipped>", "");
    line = line.replace("-\n", "");
    line = line.replace('\n', " ");
    if line.contains('&') {
        line = line.replace("&quot;", "\"");
        line = line.replace("&amp;", "&");
        line = line.replace("&lt;", "<");
        line = line.replace("&gt;", ">");
    }
    let padded = format!(" {} ", line);
    let pass1 = RULE_SYMBOLS.replace_all(&padded, " ${1} ");
    let pass2 = RULE_PERIOD_AFTER.replace_all(&pass1, "${1} ${2} ");
    let pass3 = RULE_PERIOD_BEFORE.replace_all(&pass2, " ${1} ${2}");
    let pass4 = RULE_DIGIT_HYPHEN.replace_all(&pass3, "${1} ${2} ");
    pass4.split_whitespace().map(str::to_owned).collect()
}
