//! Cross-reference links of the form `...?other=base_model:<relation>:<namespace>/<name>`.

use alloc::string::ToString;

use percent_encoding::percent_decode_str;

use super::{EvidenceSource, Mention};
use crate::ids::Relation;

/// Recognizes a filtered model-listing URL and returns the named parent model.
/// Anything else yields `None`.
pub fn extract_cross_reference(url: &str) -> Option<Mention> {
    let without_fragment = url.split('#').next()?;
    let (_, query) = without_fragment.split_once('?')?;
    query.split('&').find_map(|param| {
        let (key, value) = param.split_once('=')?;
        if key != "other" {
            return None;
        }
        let value = percent_decode_str(value).decode_utf8().ok()?;
        parse_filter(&value)
    })
}

fn parse_filter(value: &str) -> Option<Mention> {
    let rest = value.strip_prefix("base_model:")?;
    let (relation, target) = rest.split_once(':')?;
    let relation = Relation::from_token(relation)?;
    let (namespace, name) = target.rsplit_once('/')?;
    if namespace.is_empty() || name.is_empty() || target.chars().any(|c| c.is_whitespace() || c == ':') {
        return None;
    }
    Some(Mention {
        name: target.to_string(),
        kind: relation.edge_kind(),
        source: EvidenceSource::CrossReferenceUrl,
    })
}
