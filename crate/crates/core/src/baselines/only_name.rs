use crate::corpus::tokenize_text;

const ARTICLES: [&str; 3] = ["a", "an", "the"];
const CONNECTORS: [&str; 3] = ["of", "the", "and"];

fn is_article(token: &str) -> bool {
    ARTICLES.contains(&token.to_lowercase().as_str())
}

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// Capitalized run starting at `start`. Connector words stay inside the run
/// only when a capitalized token follows them.
fn capitalized_run(tokens: &[String], start: usize) -> &[String] {
    let mut end = start + 1;
    loop {
        let mut j = end;
        while j < tokens.len() && CONNECTORS.contains(&tokens[j].as_str()) {
            j += 1;
        }
        if j < tokens.len() && is_capitalized(&tokens[j]) {
            end = j + 1;
        } else {
            break;
        }
    }
    &tokens[start..end]
}

/// Entity name read off the raw profile text: the first run of capitalized
/// words, else the first word that is not an article.
pub fn only_name(raw_profile: &str) -> Vec<String> {
    let tokens = tokenize_text(raw_profile);
    let mut i = 0;
    while i < tokens.len() {
        if is_capitalized(&tokens[i]) {
            let run = capitalized_run(&tokens, i);
            if !run.iter().all(|t| is_article(t)) {
                return run.to_vec();
            }
            i += run.len();
        } else {
            i += 1;
        }
    }
    tokens
        .iter()
        .find(|t| is_word(t) && !is_article(t))
        .or_else(|| tokens.first())
        .map(|t| vec![t.clone()])
        .unwrap_or_default()
}
