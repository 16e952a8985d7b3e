use crate::error::ParseError;
use crate::word::Word;

use super::{Grammar, GrammarError, Item, Rule};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Literal(Word),
    Epsilon,
    Arrow,
    Bar,
    LParen,
    RParen,
    Comma,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let err = |msg: String| ParseError::at_line(lineno, msg);
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => break,
            '|' => {
                chars.next();
                tokens.push(Token::Bar);
            }
            '(' => {
                chars.next();
                tokens.push(Token::LParen);
            }
            ')' => {
                chars.next();
                tokens.push(Token::RParen);
            }
            ',' => {
                chars.next();
                tokens.push(Token::Comma);
            }
            '-' => {
                chars.next();
                match chars.next() {
                    Some((_, '>')) => tokens.push(Token::Arrow),
                    _ => return Err(err("expected `->`".into())),
                }
            }
            '"' => {
                chars.next();
                let rest = &line[i + 1..];
                let close = rest
                    .find('"')
                    .ok_or_else(|| err("unterminated string literal".into()))?;
                let word: Word = rest[..close]
                    .parse()
                    .map_err(|e: ParseError| e.with_line(lineno))?;
                tokens.push(Token::Literal(word));
                for _ in 0..=close {
                    chars.next();
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '*' {
                        end = j + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let ident = &line[i..end];
                if ident == "_" {
                    tokens.push(Token::Epsilon);
                } else {
                    tokens.push(Token::Ident(ident.to_string()));
                }
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if *t == want => Ok(()),
            _ => Err(ParseError::at_line(self.line, format!("expected {what}"))),
        }
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let line = self.line;
        match self.next().cloned() {
            Some(Token::Literal(w)) => Ok(Item::Word(w)),
            Some(Token::Epsilon) => Ok(Item::Word(Word::empty())),
            Some(Token::Ident(name)) => {
                if self.peek() != Some(&Token::LParen) {
                    return Ok(Item::Nonterminal(name));
                }
                self.next();
                let first = self.item()?;
                let item = match name.as_str() {
                    "shuffle" => {
                        self.expect(Token::Comma, "`,` between shuffle operands")?;
                        let second = self.item()?;
                        Item::shuffle(first, second)
                    }
                    "point" => Item::point(first),
                    "mark" => Item::mark(first),
                    "star" => Item::star(first),
                    "sclose" => Item::sclose(first),
                    other => {
                        return Err(ParseError::at_line(
                            line,
                            format!("unknown operator `{other}`"),
                        ))
                    }
                };
                self.expect(Token::RParen, "`)`")?;
                Ok(item)
            }
            Some(t) => Err(ParseError::at_line(line, format!("unexpected {t:?}"))),
            None => Err(ParseError::at_line(line, "unexpected end of line")),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(super) fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let mut start: Option<String> = None;
    let mut first_lhs: Option<String> = None;
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("@start") {
            let name = rest.split('#').next().unwrap_or("").trim();
            if !is_identifier(name) {
                return Err(
                    ParseError::at_line(lineno, "`@start` needs a nonterminal name").into(),
                );
            }
            start = Some(name.to_string());
            continue;
        }
        let tokens = tokenize(line, lineno)?;
        let mut cur = Cursor {
            tokens: &tokens,
            pos: 0,
            line: lineno,
        };
        let lhs = match cur.next() {
            Some(Token::Ident(name)) => name.clone(),
            _ => {
                return Err(
                    ParseError::at_line(lineno, "rule must start with a nonterminal name").into(),
                )
            }
        };
        cur.expect(Token::Arrow, "`->` after the rule name")?;
        first_lhs.get_or_insert_with(|| lhs.clone());
        loop {
            let mut items = Vec::new();
            while !matches!(cur.peek(), None | Some(Token::Bar)) {
                items.push(cur.item()?);
            }
            if items.is_empty() {
                return Err(ParseError::at_line(
                    lineno,
                    "empty alternative (write `_` for the empty word)",
                )
                .into());
            }
            // `_` inside a longer concatenation is the unit and can be dropped.
            let items: Vec<Item> = if items.len() > 1 {
                items
                    .into_iter()
                    .filter(|i| !matches!(i, Item::Word(w) if w.is_empty()))
                    .collect()
            } else {
                items
            };
            let items = match items.as_slice() {
                [Item::Word(w)] if w.is_empty() => Vec::new(),
                _ => items,
            };
            rules.push(Rule {
                lhs: lhs.clone(),
                rhs: super::Alternative::new(items),
                line: Some(lineno),
            });
            if cur.next().is_none() {
                break;
            }
        }
    }
    let start = start.or(first_lhs).ok_or(GrammarError::EmptyRuleSet)?;
    Grammar::new(&start, rules)
}

#[cfg(test)]
mod tests {
    use super::super::{Alternative, Grammar, GrammarError, Item};

    #[test]
    fn dyck_grammar() {
        let g = Grammar::parse(r#"D -> _ | "u" D "d" D"#).unwrap();
        assert_eq!(g.start(), "D");
        assert_eq!(g.rules().len(), 2);
        assert_eq!(g.rules()[0].rhs, Alternative::epsilon());
        assert_eq!(
            g.rules()[1].rhs.items,
            vec![
                Item::word("u"),
                Item::nt("D"),
                Item::word("d"),
                Item::nt("D")
            ]
        );
    }

    #[test]
    fn factorial_grammar() {
        let g = Grammar::parse(r#"A -> _ | "a" A | "bc" point(A)"#).unwrap();
        assert_eq!(g.rules().len(), 3);
        assert_eq!(
            g.rules()[2].rhs.items,
            vec![Item::word("bc"), Item::point(Item::nt("A"))]
        );
    }

    #[test]
    fn operators_and_comments() {
        let text = "# walks\n@start W\nW -> shuffle(D, E)   # quarter plane\nD -> _ | \"u\" D \"d\" D\nE -> _ | \"l\" E \"r\" E\nS -> sclose(\"ab\") | mark(point(D)) | star(E)\n";
        let g = Grammar::parse(text).unwrap();
        assert_eq!(g.start(), "W");
        assert_eq!(
            g.rules()[0].rhs.items,
            vec![Item::shuffle(Item::nt("D"), Item::nt("E"))]
        );
        assert_eq!(
            g.rules().iter().find(|r| r.lhs == "S").unwrap().rhs.items,
            vec![Item::sclose(Item::word("ab"))]
        );
        assert!(g.nonterminals().contains(&"E*".to_string()));
    }

    #[test]
    fn missing_rule_reports_line() {
        let err = Grammar::parse("\nA -> shuffle(B, C)\nC -> \"c\"").unwrap_err();
        assert_eq!(
            err,
            GrammarError::UnknownNonterminal {
                name: "B".into(),
                line: Some(2)
            }
        );
        assert_eq!(
            err.to_string(),
            "line 2: nonterminal `B` is used but has no rules"
        );
    }

    #[test]
    fn syntax_errors() {
        let cases = [
            ("A -> \"a", 1),
            ("A => \"a\"", 1),
            ("A -> shuffle(A)", 1),
            ("\n\nA -> frob(A)", 3),
            ("A -> \"a\" | ", 1),
            ("A -> \"a-b\"", 1),
            ("-> A", 1),
        ];
        for (text, line) in cases {
            match Grammar::parse(text) {
                Err(GrammarError::Parse(e)) => assert_eq!(e.line, Some(line), "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert_eq!(
            Grammar::parse("# nothing\n"),
            Err(GrammarError::EmptyRuleSet)
        );
    }

    #[test]
    fn display_round_trips() {
        let text = "A -> _ | \"a\" A | \"b c\" point(A)\n";
        assert_eq!(Grammar::parse(text).unwrap().to_string(), text);
        let text = "@start B\nA -> \"[x1_0] ~a'\"\nB -> shuffle(A, A)\n";
        let g = Grammar::parse(text).unwrap();
        assert_eq!(g.to_string(), text);
        assert_eq!(Grammar::parse(&g.to_string()).unwrap(), g);
    }
}
