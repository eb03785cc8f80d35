use super::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Numeric literal with its source text; integers and reals alike.
    Number(String),
    Str(String),
    Kw(Kw),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    DotDot,
    Assign,
    EqEq,
    Lt,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kw {
    Task,
    Param,
    Let,
    Constraint,
    Weight,
    All,
    Frames,
    Frame,
    First,
    Mid,
    Last,
    And,
    Or,
    When,
    Far,
    For,
    In,
    Float,
    Vec3,
}

pub const KEYWORDS: [(&str, Kw); 19] = [
    ("task", Kw::Task),
    ("param", Kw::Param),
    ("let", Kw::Let),
    ("constraint", Kw::Constraint),
    ("weight", Kw::Weight),
    ("all", Kw::All),
    ("frames", Kw::Frames),
    ("frame", Kw::Frame),
    ("first", Kw::First),
    ("mid", Kw::Mid),
    ("last", Kw::Last),
    ("and", Kw::And),
    ("or", Kw::Or),
    ("when", Kw::When),
    ("far", Kw::Far),
    ("for", Kw::For),
    ("in", Kw::In),
    ("float", Kw::Float),
    ("vec3", Kw::Vec3),
];

impl Kw {
    pub fn text(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(s, _)| *s).expect("every keyword is listed")
    }
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Number(s) => format!("number {s}"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Kw(k) => format!("keyword '{}'", k.text()),
            Tok::Eof => "end of input".into(),
            other => format!("'{}'", punct(other)),
        }
    }
}

fn punct(t: &Tok) -> &'static str {
    match t {
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Comma => ",",
        Tok::Semi => ";",
        Tok::Colon => ":",
        Tok::Dot => ".",
        Tok::DotDot => "..",
        Tok::Assign => "=",
        Tok::EqEq => "==",
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        _ => "?",
    }
}

/// Splits source text into tokens; `//` starts a line comment.
pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            match KEYWORDS.iter().find(|(s, _)| *s == word) {
                Some((_, k)) => Tok::Kw(*k),
                None => Tok::Ident(word.to_string()),
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(bytes.get(i), Some(b'e' | b'E')) {
                let mut j = i + 1;
                if matches!(bytes.get(j), Some(b'+' | b'-')) {
                    j += 1;
                }
                if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            Tok::Number(src[start..i].to_string())
        } else if c == b'"' {
            i += 1;
            let mut s = String::new();
            loop {
                match src[i..].chars().next() {
                    None | Some('\n') => {
                        return Err(Diagnostic::error(src, Span::new(start, i), "unterminated string"));
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        match src[i + 1..].chars().next() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            Some('n') => s.push('\n'),
                            _ => {
                                return Err(Diagnostic::error(src, Span::new(i, i + 2), "unknown escape sequence"));
                            }
                        }
                        i += 2;
                    }
                    Some(ch) => {
                        s.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            Tok::Str(s)
        } else {
            let two = bytes.get(i + 1).copied();
            let (t, len) = match (c, two) {
                (b'.', Some(b'.')) => (Tok::DotDot, 2),
                (b'=', Some(b'=')) => (Tok::EqEq, 2),
                (b'{', _) => (Tok::LBrace, 1),
                (b'}', _) => (Tok::RBrace, 1),
                (b'(', _) => (Tok::LParen, 1),
                (b')', _) => (Tok::RParen, 1),
                (b'[', _) => (Tok::LBracket, 1),
                (b']', _) => (Tok::RBracket, 1),
                (b',', _) => (Tok::Comma, 1),
                (b';', _) => (Tok::Semi, 1),
                (b':', _) => (Tok::Colon, 1),
                (b'.', _) => (Tok::Dot, 1),
                (b'=', _) => (Tok::Assign, 1),
                (b'<', _) => (Tok::Lt, 1),
                (b'>', _) => (Tok::Gt, 1),
                (b'+', _) => (Tok::Plus, 1),
                (b'-', _) => (Tok::Minus, 1),
                (b'*', _) => (Tok::Star, 1),
                (b'/', _) => (Tok::Slash, 1),
                _ => {
                    let ch = src[i..].chars().next().expect("in bounds");
                    return Err(Diagnostic::error(
                        src,
                        Span::new(i, i + ch.len_utf8()),
                        format!("unexpected character '{ch}'"),
                    ));
                }
            };
            i += len;
            t
        };
        out.push((tok, Span::new(start, i)));
    }
    out.push((Tok::Eof, Span::new(src.len(), src.len())));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn ranges_are_not_decimals() {
        assert_eq!(
            kinds("0..5 1.5 2e-3"),
            vec![
                Tok::Number("0".into()),
                Tok::DotDot,
                Tok::Number("5".into()),
                Tok::Number("1.5".into()),
                Tok::Number("2e-3".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn keywords_comments_and_strings() {
        assert_eq!(
            kinds("task \"a\\\"b\" // note\n all frames"),
            vec![Tok::Kw(Kw::Task), Tok::Str("a\"b".into()), Tok::Kw(Kw::All), Tok::Kw(Kw::Frames), Tok::Eof]
        );
    }

    #[test]
    fn spans_and_errors() {
        let toks = lex("a ==\n  b").unwrap();
        assert_eq!(toks[1].1, Span::new(2, 4));
        assert_eq!(toks[2].1, Span::new(7, 8));
        let d = lex("x\n  @").unwrap_err();
        assert_eq!((d.line, d.col), (2, 3));
        assert!(lex("\"open").is_err());
    }
}
