//! Arithmetic on config values: numbers, `pi`, `L`, `+ - * /`, parentheses.

pub(crate) fn eval(src: &str, length: Option<f64>) -> Result<f64, String> {
    let mut p = Parser {
        chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
        length,
    };
    let v = p.sum()?;
    if p.pos != p.chars.len() {
        return Err(format!("unexpected `{}` in `{src}`", p.chars[p.pos]));
    }
    if !v.is_finite() {
        return Err(format!("`{src}` is not finite"));
    }
    Ok(v)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    length: Option<f64>,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut acc = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(')') {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    self.pos += 1;
                }
                let ident: String = self.chars[start..self.pos].iter().collect();
                match ident.as_str() {
                    "pi" => Ok(std::f64::consts::PI),
                    "L" => self
                        .length
                        .ok_or_else(|| "`L` is not available here".to_string()),
                    _ => Err(format!("unknown name `{ident}`")),
                }
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    let exp_sign = (c == '-' || c == '+')
                        && matches!(self.chars.get(self.pos.wrapping_sub(1)), Some('e' | 'E'));
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                text.parse::<f64>()
                    .map_err(|_| format!("bad number `{text}`"))
            }
            Some(c) => Err(format!("unexpected `{c}`")),
            None => Err("empty expression".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::eval;
    use std::f64::consts::PI;

    #[test]
    fn arithmetic() {
        assert_eq!(eval("3*pi", None).unwrap(), 3.0 * PI);
        assert_eq!(eval("15/2*pi", None).unwrap(), 7.5 * PI);
        assert_eq!(eval("-0.35*L", Some(10.0)).unwrap(), -3.5);
        assert_eq!(eval("1e-6", None).unwrap(), 1e-6);
        assert_eq!(eval("2.5E+1", None).unwrap(), 25.0);
        assert_eq!(eval("-(1 + 2) * 2", None).unwrap(), -6.0);
    }

    #[test]
    fn errors() {
        assert!(eval("L", None).is_err());
        assert!(eval("3*", None).is_err());
        assert!(eval("abc", None).is_err());
        assert!(eval("1/0", None).is_err());
        assert!(eval("(1", None).is_err());
    }
}
