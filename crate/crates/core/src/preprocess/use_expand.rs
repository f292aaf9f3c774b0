use std::collections::HashMap;

use crate::ir::{format_number, Element, SvgDocument};

use super::{parse_number_attr, PreprocessError};

/// Replaces every `<use>` with a `<g>` holding a deep copy of its target.
///
/// The wrapper carries the use element's own attributes, and its `x`/`y`
/// offset is appended to the wrapper transform as `translate(x y)`. Symbols
/// are inlined as groups. Copied subtrees lose their `id`s.
pub fn expand_use(mut doc: SvgDocument) -> Result<SvgDocument, PreprocessError> {
    let mut index = HashMap::new();
    doc.root.walk(&mut |e| {
        if let Some(id) = e.attr("id") {
            index.entry(id.to_string()).or_insert_with(|| e.clone());
        }
    });
    let mut stack = Vec::new();
    expand_in(&mut doc.root, &index, &mut stack)?;
    Ok(doc)
}

fn href(el: &Element) -> Option<&str> {
    el.attr("href").or_else(|| el.attr("xlink:href"))
}

fn expand_in(el: &mut Element, index: &HashMap<String, Element>, stack: &mut Vec<String>) -> Result<(), PreprocessError> {
    for child in el.children.iter_mut() {
        if child.tag == "use" {
            *child = inline_use(child, index, stack)?;
        } else {
            expand_in(child, index, stack)?;
        }
    }
    Ok(())
}

fn inline_use(u: &Element, index: &HashMap<String, Element>, stack: &mut Vec<String>) -> Result<Element, PreprocessError> {
    let target = href(u).unwrap_or("");
    let id = target.strip_prefix('#').unwrap_or(target).to_string();
    let Some(found) = index.get(&id) else {
        return Err(PreprocessError::DanglingReference(id));
    };
    if stack.contains(&id) {
        return Err(PreprocessError::CyclicReference(id));
    }

    let mut copy = found.clone();
    if copy.tag == "symbol" {
        copy.tag = "g".into();
        for a in ["viewBox", "preserveAspectRatio", "x", "y", "width", "height", "refX", "refY"] {
            copy.remove_attr(a);
        }
    }
    copy.walk_mut(&mut |e| {
        e.remove_attr("id");
    });
    stack.push(id);
    if copy.tag == "use" {
        copy = inline_use(&copy, index, stack)?;
    } else {
        expand_in(&mut copy, index, stack)?;
    }
    stack.pop();

    let mut wrapper = Element::new("g");
    let num = |n: &str| u.attr(n).and_then(parse_number_attr).unwrap_or(0.0);
    let (x, y) = (num("x"), num("y"));
    let mut transform = u.attr("transform").unwrap_or("").trim().to_string();
    if x != 0.0 || y != 0.0 {
        if !transform.is_empty() {
            transform.push(' ');
        }
        transform.push_str(&format!("translate({} {})", format_number(x), format_number(y)));
    }
    for (k, v) in &u.attributes {
        if !matches!(k.as_str(), "x" | "y" | "width" | "height" | "href" | "xlink:href" | "transform" | "id") {
            wrapper.attributes.push((k.clone(), v.clone()));
        }
    }
    if !transform.is_empty() {
        wrapper.attributes.push(("transform".into(), transform));
    }
    wrapper.children.push(copy);
    Ok(wrapper)
}
