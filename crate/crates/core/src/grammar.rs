//! Mini-grammar for one-line scenario descriptions: `family:key=val,key=val`.
//!
//! Every error carries the byte offset of the offending token so the CLI can
//! point at it.

use crate::error::{Error, Result};

/// A `key=value` pair together with the byte offset of its value.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<'a> {
    pub key: &'a str,
    pub value: &'a str,
    pub key_pos: usize,
    pub value_pos: usize,
}

impl Field<'_> {
    pub fn parse_f64(&self) -> Result<f64> {
        self.value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                position: self.value_pos,
                message: format!(
                    "`{}` expects a finite number, got `{}`",
                    self.key, self.value
                ),
            })
    }

    pub fn parse_u64(&self) -> Result<u64> {
        self.value.parse::<u64>().map_err(|_| Error::Parse {
            position: self.value_pos,
            message: format!(
                "`{}` expects a non-negative integer, got `{}`",
                self.key, self.value
            ),
        })
    }
}

/// A tokenized `family:fields` string.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<'a> {
    pub family: &'a str,
    pub fields: Vec<Field<'a>>,
    /// Length of the source string; used as the position for "missing key" errors.
    pub end: usize,
}

impl<'a> Record<'a> {
    pub fn parse(src: &'a str) -> Result<Self> {
        let (family, rest, rest_pos) = match src.find(':') {
            Some(i) => (&src[..i], &src[i + 1..], i + 1),
            None => (src, "", src.len()),
        };
        let family = family.trim();
        if family.is_empty() {
            return Err(Error::Parse {
                position: 0,
                message: "missing distribution family".into(),
            });
        }

        let mut fields = Vec::new();
        let mut pos = rest_pos;
        if !rest.trim().is_empty() {
            for part in rest.split(',') {
                let Some(eq) = part.find('=') else {
                    return Err(Error::Parse {
                        position: pos,
                        message: format!("expected `key=value`, got `{part}`"),
                    });
                };
                let key = part[..eq].trim();
                let value = part[eq + 1..].trim();
                if key.is_empty() {
                    return Err(Error::Parse {
                        position: pos,
                        message: "empty key".into(),
                    });
                }
                let value_pos =
                    pos + eq + 1 + (part[eq + 1..].len() - part[eq + 1..].trim_start().len());
                if fields.iter().any(|f: &Field| f.key == key) {
                    return Err(Error::Parse {
                        position: pos,
                        message: format!("duplicate key `{key}`"),
                    });
                }
                fields.push(Field {
                    key,
                    value,
                    key_pos: pos,
                    value_pos,
                });
                pos += part.len() + 1;
            }
        }

        Ok(Record {
            family,
            fields,
            end: src.len(),
        })
    }

    pub fn get(&self, key: &str) -> Option<&Field<'a>> {
        self.fields.iter().find(|f| f.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Field<'a>> {
        self.get(key).ok_or_else(|| Error::Parse {
            position: self.end,
            message: format!("`{}` requires key `{key}`", self.family),
        })
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.fields.iter().find(|f| !allowed.contains(&f.key)) {
            Some(f) => Err(Error::Parse {
                position: f.key_pos,
                message: format!(
                    "unknown key `{}` for `{}` (expected one of: {})",
                    f.key,
                    self.family,
                    allowed.join(", ")
                ),
            }),
            None => Ok(()),
        }
    }
}

/// Parses `a..b` (inclusive) or a single integer `a`.
pub fn parse_range(src: &str) -> Result<std::ops::RangeInclusive<u64>> {
    let int = |s: &str, at: usize| {
        s.trim().parse::<u64>().map_err(|_| Error::Parse {
            position: at,
            message: format!("expected a non-negative integer, got `{s}`"),
        })
    };
    match src.find("..") {
        Some(i) => {
            let lo = int(&src[..i], 0)?;
            let hi_src = src[i + 2..].strip_prefix('=').unwrap_or(&src[i + 2..]);
            let hi = int(hi_src, i + 2)?;
            if hi < lo {
                return Err(Error::Parse {
                    position: i + 2,
                    message: format!("empty range {lo}..{hi}"),
                });
            }
            Ok(lo..=hi)
        }
        None => {
            let v = int(src, 0)?;
            Ok(v..=v)
        }
    }
}
