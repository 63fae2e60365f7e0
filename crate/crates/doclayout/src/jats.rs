//! Article-XML ingestion: parse, prune, restructure, and bucket nodes
//! into the five matching groups.
//!
//! The input is JATS-style article XML. Tag names are mapped to roles via
//! a configuration table ([`KindConfig`]) whose defaults cover the common
//! NLM journal schema; the table can be overridden from a JSON file for
//! other archives.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::{normalize_kd, NormString};

/// The five layout categories, in the fixed export order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutCategory {
    Text,
    Title,
    List,
    Table,
    Figure,
}

impl LayoutCategory {
    pub const ALL: [LayoutCategory; 5] = [
        LayoutCategory::Text,
        LayoutCategory::Title,
        LayoutCategory::List,
        LayoutCategory::Table,
        LayoutCategory::Figure,
    ];

    /// 1-based id used in the COCO export, following the category order.
    pub fn coco_id(&self) -> u32 {
        match self {
            LayoutCategory::Text => 1,
            LayoutCategory::Title => 2,
            LayoutCategory::List => 3,
            LayoutCategory::Table => 4,
            LayoutCategory::Figure => 5,
        }
    }

    pub fn from_coco_id(id: u32) -> Option<Self> {
        Self::ALL.get(id.checked_sub(1)? as usize).copied()
    }

    pub fn name(&self) -> &'static str {
        match self {
            LayoutCategory::Text => "text",
            LayoutCategory::Title => "title",
            LayoutCategory::List => "list",
            LayoutCategory::Table => "table",
            LayoutCategory::Figure => "figure",
        }
    }
}

impl fmt::Display for LayoutCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Role a recognized tag plays in grouping and category assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    /// Structural wrapper with no layout meaning of its own.
    Container,
    /// Node removed before matching (formulas and similar).
    Removal,
    ArticleTitle,
    Abstract,
    Keywords,
    SectionTitle,
    Paragraph,
    List,
    TableWrap,
    Figure,
    Caption,
    Label,
    TableFoot,
    TableBody,
    Copyright,
    License,
    Authors,
    Affiliation,
    Acknowledgments,
    Abbreviations,
    JournalId,
    FloatsGroup,
}

/// Layout category a matched node of this role is annotated as.
pub fn category_of(role: NodeRole) -> Result<LayoutCategory> {
    use NodeRole::*;
    match role {
        ArticleTitle | SectionTitle | Label => Ok(LayoutCategory::Title),
        Abstract | Keywords | Paragraph | Caption | TableFoot | Copyright | License
        | Authors | Affiliation | Acknowledgments | Abbreviations => Ok(LayoutCategory::Text),
        List => Ok(LayoutCategory::List),
        TableBody => Ok(LayoutCategory::Table),
        Figure => Ok(LayoutCategory::Figure),
        Container | Removal | TableWrap | JournalId | FloatsGroup => Err(Error::Validation(
            format!("role {role:?} has no layout category"),
        )),
    }
}

/// Tag-name to role mapping, overridable from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KindConfig {
    pub tag_roles: BTreeMap<String, NodeRole>,
}

impl Default for KindConfig {
    fn default() -> Self {
        use NodeRole::*;
        let entries: &[(&str, NodeRole)] = &[
            // removal set: formula and identifier nodes that interfere
            // with matching
            ("tex-math", Removal),
            ("edition", Removal),
            ("institution-id", Removal),
            ("disp-formula", Removal),
            ("inline-formula", Removal),
            ("alternatives", Removal),
            ("graphic", Removal),
            ("inline-graphic", Removal),
            // structure
            ("article", Container),
            ("front", Container),
            ("body", Container),
            ("back", Container),
            ("floats-group", FloatsGroup),
            ("journal-meta", Container),
            ("article-meta", Container),
            ("title-group", Container),
            ("sec", Container),
            ("list-item", Container),
            ("ref-list", Container),
            ("ref", Paragraph),
            ("journal-id", JournalId),
            // sorted content
            ("article-title", ArticleTitle),
            ("abstract", Abstract),
            ("kwd-group", Keywords),
            ("title", SectionTitle),
            ("p", Paragraph),
            // unsorted content
            ("copyright-statement", Copyright),
            ("license", License),
            ("contrib-group", Authors),
            ("aff", Affiliation),
            ("ack", Acknowledgments),
            ("glossary", Abbreviations),
            ("abbrev", Abbreviations),
            // floats
            ("list", List),
            ("table-wrap", TableWrap),
            ("fig", Figure),
            ("caption", Caption),
            ("label", Label),
            ("table-wrap-foot", TableFoot),
            ("table", TableBody),
        ];
        KindConfig {
            tag_roles: entries
                .iter()
                .map(|(t, r)| (t.to_string(), *r))
                .collect(),
        }
    }
}

impl KindConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let overrides: BTreeMap<String, NodeRole> =
            serde_json::from_str(json).map_err(|e| Error::Parse(format!("kind config: {e}")))?;
        let mut cfg = KindConfig::default();
        cfg.tag_roles.extend(overrides);
        Ok(cfg)
    }

    fn role_of(&self, tag: &str) -> Option<NodeRole> {
        self.tag_roles.get(tag).copied()
    }
}

/// Stable identifier of an XML node within one article, in document order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Mixed element content: raw text runs interleaved with child elements,
/// so pruning a child recomputes the flattened text correctly.
#[derive(Debug, Clone)]
pub enum Content {
    Text(String),
    Child(XmlNode),
}

#[derive(Debug, Clone)]
pub struct XmlNode {
    pub id: NodeId,
    pub tag: String,
    pub role: Option<NodeRole>,
    pub content: Vec<Content>,
}

impl XmlNode {
    /// Depth-first flattened, normalized text of the subtree.
    pub fn text(&self) -> NormString {
        let mut buf = String::new();
        self.collect_text(&mut buf);
        normalize_kd(&buf)
    }

    fn collect_text(&self, buf: &mut String) {
        for c in &self.content {
            match c {
                Content::Text(t) => {
                    buf.push(' ');
                    buf.push_str(t);
                }
                Content::Child(n) => n.collect_text(buf),
            }
        }
    }

    pub fn children(&self) -> impl Iterator<Item = &XmlNode> {
        self.content.iter().filter_map(|c| match c {
            Content::Child(n) => Some(n),
            Content::Text(_) => None,
        })
    }

    fn find_first(&self, role: NodeRole) -> Option<&XmlNode> {
        self.children().find(|c| c.role == Some(role))
    }
}

/// Parsed article with the metadata partitioning needs.
#[derive(Debug, Clone)]
pub struct Article {
    pub root: XmlNode,
    pub journal_id: String,
    pub has_article_title: bool,
}

/// One figure's matchable pieces; the body is inferred geometrically.
#[derive(Debug, Clone)]
pub struct FigureEntry {
    pub node_id: NodeId,
    pub label: Option<(NodeId, NormString)>,
    pub caption: Option<(NodeId, NormString)>,
}

/// One table's matchable pieces; the grid body is inferred geometrically.
#[derive(Debug, Clone)]
pub struct TableEntry {
    pub node_id: NodeId,
    pub label: Option<(NodeId, NormString)>,
    pub caption: Option<(NodeId, NormString)>,
    pub footnotes: Option<(NodeId, NormString)>,
}

/// A text node ready for matching.
#[derive(Debug, Clone)]
pub struct GroupNode {
    pub node_id: NodeId,
    pub role: NodeRole,
    pub text: NormString,
}

/// The five matching groups.
#[derive(Debug, Clone, Default)]
pub struct NodeGroups {
    pub sorted: Vec<GroupNode>,
    pub unsorted: Vec<GroupNode>,
    pub figures: Vec<FigureEntry>,
    pub tables: Vec<TableEntry>,
    pub lists: Vec<GroupNode>,
}

/// Parses the article XML into the internal tree, extracting the journal
/// id required for partitioning.
pub fn parse_article(source: &[u8], config: &KindConfig) -> Result<Article> {
    let text = std::str::from_utf8(source)
        .map_err(|e| Error::Parse(format!("article is not valid UTF-8: {e}")))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::Xml(e.to_string()))?;
    let mut next_id = 0u32;
    let root = build_node(doc.root_element(), config, &mut next_id);

    let journal_id = find_journal_id(&root).ok_or_else(|| {
        Error::Parse("article has no journal-id; required for partitioning".into())
    })?;
    let has_article_title = contains_role(&root, NodeRole::ArticleTitle);
    Ok(Article { root, journal_id, has_article_title })
}

fn build_node(el: roxmltree::Node, config: &KindConfig, next_id: &mut u32) -> XmlNode {
    let id = NodeId(*next_id);
    *next_id += 1;
    let tag = el.tag_name().name().to_string();
    let role = config.role_of(&tag);
    let mut content = Vec::new();
    for child in el.children() {
        if child.is_text() {
            if let Some(t) = child.text() {
                if !t.trim().is_empty() {
                    content.push(Content::Text(t.to_string()));
                }
            }
        } else if child.is_element() {
            content.push(Content::Child(build_node(child, config, next_id)));
        }
    }
    XmlNode { id, tag, role, content }
}

fn find_journal_id(node: &XmlNode) -> Option<String> {
    if node.role == Some(NodeRole::JournalId) {
        let t = node.text();
        if !t.is_empty() {
            return Some(t.as_str().to_string());
        }
    }
    node.children().find_map(find_journal_id)
}

fn contains_role(node: &XmlNode, role: NodeRole) -> bool {
    node.role == role.into() || node.children().any(|c| contains_role(c, role))
}

/// Removes every node of the removal set, with its subtree.
pub fn prune(mut tree: XmlNode) -> XmlNode {
    prune_in_place(&mut tree);
    tree
}

fn prune_in_place(node: &mut XmlNode) {
    node.content.retain(|c| match c {
        Content::Child(n) => n.role != Some(NodeRole::Removal),
        Content::Text(_) => true,
    });
    for c in &mut node.content {
        if let Content::Child(n) = c {
            prune_in_place(n);
        }
    }
}

/// Moves every list, table-wrap, and fig node under a single floats-group
/// branch at the end of the article, preserving relative order.
pub fn restructure_floats(mut tree: XmlNode) -> XmlNode {
    let mut floats: Vec<XmlNode> = Vec::new();
    // pull existing floats-group content first so reruns are no-ops
    let mut kept = Vec::with_capacity(tree.content.len());
    for c in std::mem::take(&mut tree.content) {
        match c {
            Content::Child(n) if n.role == Some(NodeRole::FloatsGroup) => {
                floats.extend(n.content.into_iter().filter_map(|c| match c {
                    Content::Child(n) => Some(n),
                    Content::Text(_) => None,
                }));
            }
            other => kept.push(other),
        }
    }
    tree.content = kept;
    extract_floats(&mut tree, &mut floats);
    if !floats.is_empty() {
        tree.content.push(Content::Child(XmlNode {
            id: NodeId(u32::MAX),
            tag: "floats-group".into(),
            role: Some(NodeRole::FloatsGroup),
            content: floats.into_iter().map(Content::Child).collect(),
        }));
    }
    tree
}

fn is_float(role: Option<NodeRole>) -> bool {
    matches!(
        role,
        Some(NodeRole::List) | Some(NodeRole::TableWrap) | Some(NodeRole::Figure)
    )
}

fn extract_floats(node: &mut XmlNode, floats: &mut Vec<XmlNode>) {
    let mut kept = Vec::with_capacity(node.content.len());
    for c in std::mem::take(&mut node.content) {
        match c {
            Content::Child(n) if is_float(n.role) => floats.push(n),
            other => kept.push(other),
        }
    }
    node.content = kept;
    for c in &mut node.content {
        if let Content::Child(n) = c {
            // floats nested inside a float (e.g. a list in a list) stay put
            extract_floats(n, floats);
        }
    }
}

/// Buckets the restructured tree into the five matching groups.
///
/// Nodes with empty flattened text are dropped; unknown tags are skipped
/// with a warning.
pub fn group_nodes(tree: &XmlNode) -> NodeGroups {
    let mut groups = NodeGroups::default();
    walk(tree, &mut groups);
    groups
}

fn push_text_node(out: &mut Vec<GroupNode>, node: &XmlNode, role: NodeRole) {
    let text = node.text();
    if !text.is_empty() {
        out.push(GroupNode { node_id: node.id, role, text });
    }
}

fn walk(node: &XmlNode, groups: &mut NodeGroups) {
    for child in node.children() {
        match child.role {
            Some(NodeRole::ArticleTitle) => push_text_node(&mut groups.sorted, child, NodeRole::ArticleTitle),
            Some(NodeRole::Keywords) => {
                // one textual run; keywords render as a single block
                push_text_node(&mut groups.sorted, child, NodeRole::Keywords)
            }
            Some(NodeRole::Abstract) => {
                // the abstract's own titles and paragraphs match separately
                if child.children().any(|c| {
                    matches!(c.role, Some(NodeRole::Paragraph) | Some(NodeRole::SectionTitle) | Some(NodeRole::Container))
                }) {
                    walk(child, groups);
                } else {
                    push_text_node(&mut groups.sorted, child, NodeRole::Abstract);
                }
            }
            Some(NodeRole::SectionTitle) => push_text_node(&mut groups.sorted, child, NodeRole::SectionTitle),
            Some(NodeRole::Paragraph) => push_text_node(&mut groups.sorted, child, NodeRole::Paragraph),
            Some(NodeRole::Copyright) => push_text_node(&mut groups.unsorted, child, NodeRole::Copyright),
            Some(NodeRole::License) => push_unsorted_flat(child, NodeRole::License, groups),
            Some(NodeRole::Authors) => push_text_node(&mut groups.unsorted, child, NodeRole::Authors),
            Some(NodeRole::Affiliation) => push_text_node(&mut groups.unsorted, child, NodeRole::Affiliation),
            Some(NodeRole::Acknowledgments) => push_unsorted_flat(child, NodeRole::Acknowledgments, groups),
            Some(NodeRole::Abbreviations) => push_unsorted_flat(child, NodeRole::Abbreviations, groups),
            Some(NodeRole::List) => {
                // the whole (possibly nested) list is one object
                push_text_node(&mut groups.lists, child, NodeRole::List)
            }
            Some(NodeRole::Figure) => groups.figures.push(figure_entry(child)),
            Some(NodeRole::TableWrap) => groups.tables.push(table_entry(child)),
            Some(NodeRole::Container)
            | Some(NodeRole::FloatsGroup) => walk(child, groups),
            Some(NodeRole::JournalId)
            | Some(NodeRole::Removal)
            | Some(NodeRole::Caption)
            | Some(NodeRole::Label)
            | Some(NodeRole::TableFoot)
            | Some(NodeRole::TableBody) => {
                // captions/labels/footnotes only matter inside their float;
                // stray ones outside are treated as plain containers
                walk(child, groups);
            }
            None => {
                log::warn!("unknown tag <{}> skipped; descending into children", child.tag);
                walk(child, groups);
            }
        }
    }
}

/// Unsorted wrappers whose titles and paragraphs render as separate
/// blocks (license, ack, glossary) contribute each text-bearing piece.
fn push_unsorted_flat(node: &XmlNode, role: NodeRole, groups: &mut NodeGroups) {
    let mut had_parts = false;
    for c in node.children() {
        if matches!(c.role, Some(NodeRole::Paragraph) | Some(NodeRole::SectionTitle)) {
            push_text_node(&mut groups.unsorted, c, role);
            had_parts = true;
        }
    }
    if !had_parts {
        push_text_node(&mut groups.unsorted, node, role);
    }
}

fn labeled_part(node: &XmlNode, role: NodeRole) -> Option<(NodeId, NormString)> {
    let n = node.find_first(role)?;
    let t = n.text();
    if t.is_empty() {
        None
    } else {
        Some((n.id, t))
    }
}

fn figure_entry(node: &XmlNode) -> FigureEntry {
    FigureEntry {
        node_id: node.id,
        label: labeled_part(node, NodeRole::Label),
        caption: labeled_part(node, NodeRole::Caption),
    }
}

fn table_entry(node: &XmlNode) -> TableEntry {
    TableEntry {
        node_id: node.id,
        label: labeled_part(node, NodeRole::Label),
        caption: labeled_part(node, NodeRole::Caption),
        footnotes: labeled_part(node, NodeRole::TableFoot),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(xml: &str) -> Article {
        parse_article(xml.as_bytes(), &KindConfig::default()).unwrap()
    }

    const MINIMAL: &str = r#"<article>
        <front>
          <journal-meta><journal-id>J1</journal-id></journal-meta>
          <article-meta>
            <title-group><article-title>A study of things</article-title></title-group>
            <abstract><p>We study things.</p></abstract>
          </article-meta>
        </front>
      </article>"#;

    #[test]
    fn minimal_article_parses() {
        let art = parse(MINIMAL);
        assert_eq!(art.journal_id, "J1");
        assert!(art.has_article_title);
        let groups = group_nodes(&art.root);
        assert_eq!(groups.sorted.len(), 2);
        assert_eq!(groups.sorted[0].text.as_str(), "A study of things");
        assert_eq!(groups.sorted[1].text.as_str(), "We study things.");
    }

    #[test]
    fn missing_journal_id_errors() {
        let xml = "<article><front><article-meta>\
            <title-group><article-title>T</article-title></title-group>\
            </article-meta></front></article>";
        let err = parse_article(xml.as_bytes(), &KindConfig::default()).unwrap_err();
        assert!(err.to_string().contains("journal-id"), "{err}");
    }

    #[test]
    fn malformed_xml_errors() {
        assert!(parse_article(b"<article><unclosed>", &KindConfig::default()).is_err());
    }

    #[test]
    fn nested_sections_flatten_in_document_order() {
        let xml = r#"<article>
          <front><journal-meta><journal-id>J</journal-id></journal-meta></front>
          <body>
            <sec><title>One</title><p>first</p>
              <sec><title>One A</title><p>second</p></sec>
            </sec>
            <sec><title>Two</title><p>third</p></sec>
          </body>
        </article>"#;
        let art = parse(xml);
        let groups = group_nodes(&art.root);
        let texts: Vec<&str> = groups.sorted.iter().map(|n| n.text.as_str()).collect();
        assert_eq!(texts, ["One", "first", "One A", "second", "Two", "third"]);
    }

    #[test]
    fn prune_removes_tex_math_subtree() {
        let xml = r#"<article>
          <front><journal-meta><journal-id>J</journal-id></journal-meta></front>
          <body><p>before <tex-math>x^2</tex-math> after</p></body>
        </article>"#;
        let art = parse(xml);
        let pruned = prune(art.root);
        let groups = group_nodes(&pruned);
        assert_eq!(groups.sorted[0].text.as_str(), "before after");
    }

    #[test]
    fn prune_without_removable_nodes_is_identity_on_text() {
        let art = parse(MINIMAL);
        let before = art.root.text();
        let pruned = prune(art.root);
        assert_eq!(pruned.text(), before);
    }

    #[test]
    fn prune_is_idempotent() {
        let xml = r#"<article>
          <front><journal-meta><journal-id>J</journal-id></journal-meta></front>
          <body><p>a <disp-formula>E=mc^2</disp-formula> b <inline-formula>y</inline-formula> c</p></body>
        </article>"#;
        let art = parse(xml);
        let once = prune(art.root);
        let twice = prune(once.clone());
        assert_eq!(once.text(), twice.text());
        assert_eq!(group_nodes(&twice).sorted[0].text.as_str(), "a b c");
    }

    const WITH_FLOATS: &str = r#"<article>
        <front><journal-meta><journal-id>J</journal-id></journal-meta></front>
        <body>
          <sec><title>S1</title>
            <p>para one</p>
            <fig><label>Fig. 1</label><caption><p>A figure caption.</p></caption></fig>
          </sec>
          <sec><title>S2</title>
            <table-wrap><label>Table 1</label><caption><p>A table caption.</p></caption>
              <table>cells</table>
              <table-wrap-foot><p>a footnote</p></table-wrap-foot>
            </table-wrap>
            <table-wrap><label>Table 2</label><caption><p>Second table.</p></caption></table-wrap>
            <p>para two</p>
          </sec>
        </body>
      </article>"#;

    #[test]
    fn floats_move_under_floats_group_in_order() {
        let art = parse(WITH_FLOATS);
        let tree = restructure_floats(prune(art.root));
        let fg = tree
            .children()
            .find(|c| c.role == Some(NodeRole::FloatsGroup))
            .expect("floats-group exists");
        let tags: Vec<&str> = fg.children().map(|c| c.tag.as_str()).collect();
        assert_eq!(tags, ["fig", "table-wrap", "table-wrap"]);
        let groups = group_nodes(&tree);
        assert_eq!(groups.tables[0].label.as_ref().unwrap().1.as_str(), "Table 1");
        assert_eq!(groups.tables[1].label.as_ref().unwrap().1.as_str(), "Table 2");
    }

    #[test]
    fn restructure_is_idempotent() {
        let art = parse(WITH_FLOATS);
        let once = restructure_floats(prune(art.root));
        let twice = restructure_floats(once.clone());
        let count = |t: &XmlNode| {
            t.children()
                .filter(|c| c.role == Some(NodeRole::FloatsGroup))
                .count()
        };
        assert_eq!(count(&once), 1);
        assert_eq!(count(&twice), 1);
        let groups_a = group_nodes(&once);
        let groups_b = group_nodes(&twice);
        assert_eq!(groups_a.figures.len(), groups_b.figures.len());
        assert_eq!(groups_a.tables.len(), groups_b.tables.len());
    }

    #[test]
    fn table_entry_carries_all_parts() {
        let art = parse(WITH_FLOATS);
        let tree = restructure_floats(prune(art.root));
        let groups = group_nodes(&tree);
        let t = &groups.tables[0];
        assert_eq!(t.label.as_ref().unwrap().1.as_str(), "Table 1");
        assert_eq!(t.caption.as_ref().unwrap().1.as_str(), "A table caption.");
        assert_eq!(t.footnotes.as_ref().unwrap().1.as_str(), "a footnote");
    }

    #[test]
    fn unsorted_group_membership() {
        let xml = r#"<article>
          <front><journal-meta><journal-id>J</journal-id></journal-meta>
            <article-meta>
              <contrib-group>Jane Roe and John Doe</contrib-group>
              <aff>University of Example</aff>
              <permissions>
                <copyright-statement>(c) 2020 The Authors</copyright-statement>
                <license><p>CC BY 4.0</p></license>
              </permissions>
            </article-meta>
          </front>
        </article>"#;
        let art = parse(xml);
        let groups = group_nodes(&art.root);
        let texts: Vec<&str> = groups.unsorted.iter().map(|n| n.text.as_str()).collect();
        assert!(texts.contains(&"Jane Roe and John Doe"));
        assert!(texts.contains(&"University of Example"));
        assert!(texts.contains(&"(c) 2020 The Authors"));
        assert!(texts.contains(&"CC BY 4.0"));
        assert!(groups.sorted.is_empty());
    }

    #[test]
    fn nested_list_is_a_single_entry() {
        let xml = r#"<article>
          <front><journal-meta><journal-id>J</journal-id></journal-meta></front>
          <body>
            <list><list-item><p>alpha</p>
              <list><list-item><p>beta</p></list-item></list>
            </list-item></list>
          </body>
        </article>"#;
        let art = parse(xml);
        let tree = restructure_floats(prune(art.root));
        let groups = group_nodes(&tree);
        assert_eq!(groups.lists.len(), 1);
        assert_eq!(groups.lists[0].text.as_str(), "alpha beta");
    }

    #[test]
    fn category_mapping_follows_the_taxonomy() {
        assert_eq!(category_of(NodeRole::Affiliation).unwrap(), LayoutCategory::Text);
        assert_eq!(category_of(NodeRole::SectionTitle).unwrap(), LayoutCategory::Title);
        assert_eq!(category_of(NodeRole::Caption).unwrap(), LayoutCategory::Text);
        assert_eq!(category_of(NodeRole::TableFoot).unwrap(), LayoutCategory::Text);
        assert_eq!(category_of(NodeRole::List).unwrap(), LayoutCategory::List);
        assert_eq!(category_of(NodeRole::TableBody).unwrap(), LayoutCategory::Table);
        assert_eq!(category_of(NodeRole::Figure).unwrap(), LayoutCategory::Figure);
        assert!(category_of(NodeRole::Container).is_err());
    }

    #[test]
    fn every_text_bearing_node_lands_in_exactly_one_group() {
        let art = parse(WITH_FLOATS);
        let tree = restructure_floats(prune(art.root));
        let groups = group_nodes(&tree);
        let mut ids: Vec<NodeId> = Vec::new();
        ids.extend(groups.sorted.iter().map(|n| n.node_id));
        ids.extend(groups.unsorted.iter().map(|n| n.node_id));
        ids.extend(groups.lists.iter().map(|n| n.node_id));
        for f in &groups.figures {
            ids.extend(f.label.iter().map(|l| l.0));
            ids.extend(f.caption.iter().map(|c| c.0));
        }
        for t in &groups.tables {
            ids.extend(t.label.iter().map(|l| l.0));
            ids.extend(t.caption.iter().map(|c| c.0));
            ids.extend(t.footnotes.iter().map(|f| f.0));
        }
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len(), "a node appears in two groups");
    }

    #[test]
    fn config_override_adds_removal_tag() {
        let cfg = KindConfig::from_json(r#"{ "custom-math": "removal" }"#).unwrap();
        let xml = r#"<article>
          <front><journal-meta><journal-id>J</journal-id></journal-meta></front>
          <body><p>keep <custom-math>drop</custom-math> this</p></body>
        </article>"#;
        let art = parse_article(xml.as_bytes(), &cfg).unwrap();
        let pruned = prune(art.root);
        let groups = group_nodes(&pruned);
        assert_eq!(groups.sorted[0].text.as_str(), "keep this");
    }
}
