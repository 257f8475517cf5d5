//! A small tokenizer and token cursor shared by the Cypher, SQL and rule
//! parsers.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// A delimited identifier: `"x"` in SQL, `` `x` `` in Cypher.
    Quoted(String),
    Int(i64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Cypher,
    Sql,
    Rules,
}

const SYMBOLS: &[&str] = &[
    "<>", "!=", "<=", ">=", "->", "<-", "(", ")", "[", "]", "{", "}", ",", ".", ":", ";", "*", "+", "-", "/", "%", "=",
    "<", ">", "|",
];

pub fn lex(src: &str, dialect: Dialect) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, chars: &[char]| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, &chars);
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let comment = match dialect {
            Dialect::Sql => rest == "--",
            Dialect::Cypher => rest == "//",
            Dialect::Rules => c == '#' || rest == "//",
        };
        if comment {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, &chars);
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col, &chars);
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col, &chars);
            }
            let v =
                s.parse::<i64>().map_err(|_| ParseError::new(tl, tc, format!("integer literal `{s}` out of range")))?;
            Tok::Int(v)
        } else if c == '\'' || c == '"' || c == '`' {
            let quoted_ident = match dialect {
                Dialect::Sql => c == '"',
                Dialect::Cypher => c == '`',
                Dialect::Rules => false,
            };
            if c == '`' && dialect != Dialect::Cypher {
                return Err(ParseError::new(tl, tc, "unexpected character '`'"));
            }
            advance(&mut i, &mut line, &mut col, &chars);
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::new(tl, tc, "unterminated quoted text"));
                }
                if chars[i] == c {
                    if i + 1 < chars.len() && chars[i + 1] == c {
                        s.push(c);
                        advance(&mut i, &mut line, &mut col, &chars);
                        advance(&mut i, &mut line, &mut col, &chars);
                        continue;
                    }
                    advance(&mut i, &mut line, &mut col, &chars);
                    break;
                }
                s.push(chars[i]);
                advance(&mut i, &mut line, &mut col, &chars);
            }
            if quoted_ident {
                Tok::Quoted(s)
            } else {
                Tok::Str(s)
            }
        } else {
            let sym = SYMBOLS.iter().find(|s| {
                let arrow = **s == "->" || **s == "<-";
                let allowed = !arrow || dialect == Dialect::Cypher || (dialect == Dialect::Rules && **s == "->");
                allowed && chars[i..].iter().take(s.len()).copied().eq(s.chars())
            });
            let Some(sym) = sym else {
                return Err(ParseError::new(tl, tc, format!("unexpected character '{c}'")));
            };
            for _ in 0..sym.len() {
                advance(&mut i, &mut line, &mut col, &chars);
            }
            Tok::Sym(if *sym == "!=" { "<>" } else { sym })
        };
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Cursor over a token stream with the usual recursive-descent helpers.
/// Keywords are matched case-insensitively against identifier tokens.
#[derive(Debug, Clone)]
pub struct Cursor {
    toks: Vec<Token>,
    pub pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(t.line, t.col, msg)
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("quoted identifier `{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        self.error(format!("expected {wanted}, found {found}"))
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x.eq_ignore_ascii_case(kw))
    }

    pub fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident(x) if x.eq_ignore_ascii_case(kw))
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str, d: Dialect) -> Vec<Tok> {
        lex(s, d).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn cypher_arrows() {
        assert_eq!(
            toks("(a)-[e]->(b)<-[f]-(c)", Dialect::Cypher),
            vec![
                Tok::Sym("("),
                Tok::Ident("a".into()),
                Tok::Sym(")"),
                Tok::Sym("-"),
                Tok::Sym("["),
                Tok::Ident("e".into()),
                Tok::Sym("]"),
                Tok::Sym("->"),
                Tok::Sym("("),
                Tok::Ident("b".into()),
                Tok::Sym(")"),
                Tok::Sym("<-"),
                Tok::Sym("["),
                Tok::Ident("f".into()),
                Tok::Sym("]"),
                Tok::Sym("-"),
                Tok::Sym("("),
                Tok::Ident("c".into()),
                Tok::Sym(")"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn sql_quoting_and_comments() {
        assert_eq!(
            toks("SELECT \"a b\", 'it''s' -- note\n<> !=", Dialect::Sql),
            vec![
                Tok::Ident("SELECT".into()),
                Tok::Quoted("a b".into()),
                Tok::Sym(","),
                Tok::Str("it's".into()),
                Tok::Sym("<>"),
                Tok::Sym("<>"),
                Tok::Eof,
            ]
        );
        assert_eq!(toks("a<-1", Dialect::Sql)[1], Tok::Sym("<"));
    }

    #[test]
    fn reports_positions() {
        let e = lex("x\n  ?", Dialect::Sql).unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(lex("'open", Dialect::Sql).is_err());
    }
}
