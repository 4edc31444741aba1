//! `key=value,key=value` parameter lists.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::failure::Failure;

/// Parsed `key=value` pairs. Every key must be consumed by [`Params::finish`].
#[derive(Debug)]
pub struct Params {
    flag: String,
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(flag: &str, text: &str) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Failure::config(format!("--{flag}: expected key=value, got `{item}`"))
            })?;
            if values
                .insert(key.trim().to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Failure::config(format!("--{flag}: `{key}` given twice")));
            }
        }
        Ok(Self {
            flag: flag.into(),
            values,
        })
    }

    pub fn optional<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, Failure> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Failure::config(format!("--{}: cannot parse {key}=`{v}`", self.flag))),
        }
    }

    pub fn required<T: FromStr>(&mut self, key: &str) -> Result<T, Failure> {
        self.optional(key)?
            .ok_or_else(|| Failure::config(format!("--{}: missing `{key}`", self.flag)))
    }

    /// Colon-separated list, e.g. `h=0.4:1.4`.
    pub fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, Failure> {
        let Some(text) = self.optional::<String>(key)? else {
            return Ok(None);
        };
        text.split(':')
            .map(|v| {
                v.trim().parse().map_err(|_| {
                    Failure::config(format!("--{}: cannot parse `{v}` in {key}", self.flag))
                })
            })
            .collect::<Result<_, _>>()
            .map(Some)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn finish(self) -> Result<(), Failure> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(key) => Err(Failure::config(format!(
                "--{}: unknown key `{key}`",
                self.flag
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_typed_values() {
        let mut p = Params::parse("uniform", "L=11, M=11,h=0.4").unwrap();
        assert_eq!(p.required::<f64>("L").unwrap(), 11.0);
        assert_eq!(p.required::<usize>("M").unwrap(), 11);
        assert_eq!(p.optional::<f64>("delta").unwrap(), None);
        assert_eq!(p.required::<f64>("h").unwrap(), 0.4);
        p.finish().unwrap();
    }

    #[test]
    fn rejects_leftovers_and_duplicates() {
        let mut p = Params::parse("box", "L=1,x=2").unwrap();
        p.required::<f64>("L").unwrap();
        assert!(p.finish().unwrap_err().message.contains("`x`"));
        assert!(Params::parse("box", "L=1,L=2").is_err());
        assert!(Params::parse("box", "L").is_err());
    }

    #[test]
    fn lists_split_on_colons() {
        let mut p = Params::parse("cell", "h=0.4:1.4").unwrap();
        assert_eq!(p.list("h").unwrap(), Some(vec![0.4, 1.4]));
        let mut p = Params::parse("cell", "h=0.4:x").unwrap();
        assert!(p.list("h").is_err());
    }
}
