//! Extraction of decisions from free-form agent replies.
//!
//! Models often wrap their JSON in prose, so the parser takes the first
//! syntactically complete JSON object found anywhere in the text.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::games::{validate_decision, validate_sanction, Decision, GameKind, GameParams, PlayerId, Violation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no JSON object found in response")]
    NoJsonFound,
    #[error("response JSON does not match the schema: {0}")]
    SchemaMismatch(String),
    #[error("decision is invalid: {0}")]
    ValidationFailed(Violation),
}

/// First complete JSON object embedded in `raw`.
pub fn extract_json_object(raw: &str) -> Option<Map<String, Value>> {
    raw.char_indices().filter(|&(_, c)| c == '{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    })
}

fn integer_field(obj: &Map<String, Value>, key: &str, max: u32) -> Result<u32, ParseError> {
    let value = obj.get(key).ok_or_else(|| ParseError::SchemaMismatch(format!("missing key \"{key}\"")))?;
    to_bounded_int(value, key, max)
}

fn to_bounded_int(value: &Value, field: &str, max: u32) -> Result<u32, ParseError> {
    let n = match value {
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                i
            } else if let Some(f) = num.as_f64().filter(|f| f.fract() == 0.0 && f.abs() < 1e15) {
                f as i64
            } else {
                return Err(ParseError::SchemaMismatch(format!("\"{field}\" must be an integer, got {num}")));
            }
        }
        other => {
            return Err(ParseError::SchemaMismatch(format!("\"{field}\" must be an integer, got {other}")));
        }
    };
    if n < 0 || n > i64::from(max) {
        return Err(ParseError::ValidationFailed(Violation::OutOfRange {
            field: field.to_string(),
            value: n,
            min: 0,
            max: i64::from(max),
        }));
    }
    Ok(n as u32)
}

/// Parses a main-phase decision and validates it against the game.
pub fn parse_decision(raw: &str, kind: GameKind, p: &GameParams) -> Result<Decision, ParseError> {
    let obj = extract_json_object(raw).ok_or(ParseError::NoJsonFound)?;
    let e = p.endowment;
    let d = match kind {
        GameKind::WeakestLink => Decision::Effort(integer_field(&obj, "effort", e)?),
        GameKind::Cpr | GameKind::CprSanction => Decision::Extract(integer_field(&obj, "extract", e)?),
        GameKind::CollectiveRisk => Decision::Contribute(integer_field(&obj, "contribute", e)?),
        GameKind::ORing => Decision::Withdraw(integer_field(&obj, "withdraw", e)?),
        GameKind::PublicGoods => Decision::Allocate {
            keep: integer_field(&obj, "keep", e)?,
            group: integer_field(&obj, "group", e)?,
            global: integer_field(&obj, "global", e)?,
        },
    };
    validate_decision(kind, &d, p).map_err(ParseError::ValidationFailed)?;
    Ok(d)
}

/// Parses a sanction-phase reply `{"sanctions": {"player_k": units, ...}}`.
///
/// Zero-unit entries are dropped.
pub fn parse_sanctions(
    raw: &str,
    kind: GameKind,
    sanctioner: PlayerId,
    p: &GameParams,
) -> Result<Decision, ParseError> {
    let obj = extract_json_object(raw).ok_or(ParseError::NoJsonFound)?;
    let targets = obj
        .get("sanctions")
        .ok_or_else(|| ParseError::SchemaMismatch("missing key \"sanctions\"".into()))?;
    let targets = match targets {
        Value::Object(m) => m,
        Value::Null => &Map::new(),
        other => return Err(ParseError::SchemaMismatch(format!("\"sanctions\" must be an object, got {other}"))),
    };
    let mut map = BTreeMap::new();
    for (key, value) in targets {
        let target: PlayerId = key
            .parse()
            .map_err(|_| ParseError::ValidationFailed(Violation::InvalidSanctionTarget(key.clone())))?;
        let units = to_bounded_int(value, &format!("sanctions.{key}"), p.endowment)?;
        if units > 0 {
            map.insert(target, units);
        }
    }
    let d = Decision::Sanction(map);
    validate_sanction(kind, sanctioner, &d, p).map_err(ParseError::ValidationFailed)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> GameParams {
        GameParams::default()
    }

    #[test]
    fn plain_contribute() {
        let cr = GameParams::for_game(GameKind::CollectiveRisk);
        assert_eq!(
            parse_decision(r#"{"contribute": 3}"#, GameKind::CollectiveRisk, &cr),
            Ok(Decision::Contribute(3))
        );
    }

    #[test]
    fn prose_wrapped_object() {
        assert_eq!(
            parse_decision(r#"Sure! Here is my choice: {"extract": 5}."#, GameKind::Cpr, &p()),
            Ok(Decision::Extract(5))
        );
    }

    #[test]
    fn allocation_sum_violation() {
        assert_eq!(
            parse_decision(r#"{"keep":5,"group":3,"global":3}"#, GameKind::PublicGoods, &p()),
            Err(ParseError::ValidationFailed(Violation::AllocationSumMismatch { sum: 11, endowment: 10 }))
        );
    }

    #[test]
    fn stray_brace_before_real_object() {
        let raw = r#"I think {maybe} the answer is {"effort": 4} thanks"#;
        assert_eq!(parse_decision(raw, GameKind::WeakestLink, &p()), Ok(Decision::Effort(4)));
    }

    #[test]
    fn nested_object_is_taken_whole() {
        let raw = r#"{"reasoning": {"note": "x"}, "withdraw": 6}"#;
        assert_eq!(parse_decision(raw, GameKind::ORing, &p()), Ok(Decision::Withdraw(6)));
    }

    #[test]
    fn failure_classes() {
        assert_eq!(parse_decision("hello", GameKind::Cpr, &p()), Err(ParseError::NoJsonFound));
        assert!(matches!(
            parse_decision(r#"{"effort": 3}"#, GameKind::Cpr, &p()),
            Err(ParseError::SchemaMismatch(_))
        ));
        assert!(matches!(
            parse_decision(r#"{"extract": "3"}"#, GameKind::Cpr, &p()),
            Err(ParseError::SchemaMismatch(_))
        ));
        assert!(matches!(
            parse_decision(r#"{"extract": 2.5}"#, GameKind::Cpr, &p()),
            Err(ParseError::SchemaMismatch(_))
        ));
        assert!(matches!(
            parse_decision(r#"{"extract": -1}"#, GameKind::Cpr, &p()),
            Err(ParseError::ValidationFailed(Violation::OutOfRange { value: -1, .. }))
        ));
        assert!(matches!(
            parse_decision(r#"{"extract": 11}"#, GameKind::Cpr, &p()),
            Err(ParseError::ValidationFailed(Violation::OutOfRange { value: 11, .. }))
        ));
        assert_eq!(parse_decision(r#"{"extract": 4.0}"#, GameKind::Cpr, &p()), Ok(Decision::Extract(4)));
    }

    #[test]
    fn sanctions_parse_and_validate() {
        let d = parse_sanctions(r#"{"sanctions": {"player_2": 1, "player_3": 0}}"#, GameKind::CprSanction, PlayerId(0), &p())
            .unwrap();
        assert_eq!(d, Decision::Sanction([(PlayerId(1), 1)].into()));
        assert_eq!(
            parse_sanctions(r#"{"sanctions": {}}"#, GameKind::CprSanction, PlayerId(0), &p()),
            Ok(Decision::Sanction(BTreeMap::new()))
        );
        assert!(matches!(
            parse_sanctions(r#"{"sanctions": {"player_9": 1}}"#, GameKind::CprSanction, PlayerId(0), &p()),
            Err(ParseError::ValidationFailed(Violation::InvalidSanctionTarget(_)))
        ));
        assert!(matches!(
            parse_sanctions(r#"{"sanctions": {"bob": 1}}"#, GameKind::CprSanction, PlayerId(0), &p()),
            Err(ParseError::ValidationFailed(Violation::InvalidSanctionTarget(_)))
        ));
        assert!(matches!(
            parse_sanctions(r#"{"punish": {}}"#, GameKind::CprSanction, PlayerId(0), &p()),
            Err(ParseError::SchemaMismatch(_))
        ));
    }
}
