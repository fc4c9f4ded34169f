//! Seeded template-based corpus generator.
//!
//! Documents are sequences of blocks. Each block realises one gold relation,
//! either inside one sentence or across two adjacent sentences, and may be
//! followed by distractor sentences (one typed entity, no relation),
//! unannotated co-mention sentences (a type-compatible pair with a negative
//! cue word) and filler sentences. Each document draws from its own ChaCha
//! stream, so output does not depend on generation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Corpus, CorpusError, Document, EntityMention, EntityType, RelationAnnotation, RelationSchema,
    Result, Schema,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeLexicon {
    pub name: String,
    pub abbreviation: String,
    pub surfaces: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub name: String,
    pub left: Vec<String>,
    pub right: Vec<String>,
    /// Probability that a gold pair is placed inside one sentence.
    #[serde(default = "default_intra")]
    pub intra_fraction: f64,
    /// Relative frequency among gold relations.
    #[serde(default = "default_weight")]
    pub weight: f64,
    /// Words linking the two arguments in annotated sentences.
    #[serde(default)]
    pub cues: Vec<String>,
    /// Words linking the two arguments in unannotated co-mention sentences.
    #[serde(default)]
    pub negative_cues: Vec<String>,
}

fn default_intra() -> f64 {
    1.0
}
fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub documents: usize,
    /// Mean gold relations per document.
    pub positives_per_document: f64,
    /// Mean distractor sentences per block.
    #[serde(default)]
    pub distractor_density: f64,
    /// Mean unannotated co-mention sentences per block.
    #[serde(default)]
    pub negative_density: f64,
    /// Mean entity-free filler sentences per block.
    #[serde(default)]
    pub filler_density: f64,
    /// Largest number of tokens preceding the second mention of a
    /// cross-sentence pair within its sentence.
    #[serde(default = "default_gap")]
    pub max_inter_gap: usize,
    /// Put a filler sentence between consecutive blocks, and before every
    /// extra sentence of a block, so no two of them share an
    /// adjacent-sentence window.
    #[serde(default)]
    pub separate_blocks: bool,
    #[serde(default = "default_prefix")]
    pub id_prefix: String,
    #[serde(rename = "entity_type")]
    pub entity_types: Vec<TypeLexicon>,
    #[serde(rename = "relation")]
    pub relations: Vec<RelationSpec>,
}

fn default_gap() -> usize {
    6
}
fn default_prefix() -> String {
    "doc".into()
}

const NEGATIVE_CUES: &[&str] = &["unrelated", "separately", "independently", "apart", "distinct", "aside"];
const FALLBACK_CUES: &[&str] = &["with"];
const PAIR_TEMPLATES: &[(&str, &str, &str, &str)] = &[
    ("The patient", "", "", "as expected."),
    ("Overall", "", "", "today."),
    ("She", "", "", "recently."),
];
const GAP_WORDS: &[&str] = &["then", "later", "the", "team", "also", "briefly", "again", "thereafter"];
const FILLERS: &[&str] = &[
    "She is otherwise well.",
    "Her weight is stable.",
    "We will keep her under surveillance.",
    "No new symptoms were reported.",
    "Examination was unremarkable today.",
    "Thank you for seeing her.",
];
const OPENING: &str = "Thank you for referring this lady to clinic.";

impl GeneratorConfig {
    pub fn from_toml(raw: &str) -> Result<Self> {
        let cfg: GeneratorConfig =
            toml::from_str(raw).map_err(|e| CorpusError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("generator config serializes")
    }

    pub fn schema(&self) -> Schema {
        Schema {
            entity_types: self
                .entity_types
                .iter()
                .map(|t| EntityType {
                    name: t.name.clone(),
                    abbreviation: t.abbreviation.clone(),
                })
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|r| RelationSchema::new(&r.name, r.left.iter().cloned(), r.right.iter().cloned()))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(CorpusError::Config(m));
        self.schema().validate().map_err(|e| CorpusError::Config(e.to_string()))?;
        for (name, v) in [
            ("positives_per_document", self.positives_per_document),
            ("distractor_density", self.distractor_density),
            ("negative_density", self.negative_density),
            ("filler_density", self.filler_density),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return cfg(format!("{name} must be a non-negative number"));
            }
        }
        if self.relations.is_empty() && self.positives_per_document > 0.0 {
            return cfg("positives_per_document > 0 requires at least one relation".into());
        }
        if !self.relations.is_empty() && self.relations.iter().map(|r| r.weight).sum::<f64>() <= 0.0 {
            return cfg("relation weights must not all be zero".into());
        }
        for r in &self.relations {
            if !(0.0..=1.0).contains(&r.intra_fraction) {
                return cfg(format!("{}: intra_fraction must lie in [0, 1]", r.name));
            }
            if !(r.weight.is_finite() && r.weight >= 0.0) {
                return cfg(format!("{}: weight must be non-negative", r.name));
            }
        }
        for t in &self.entity_types {
            if t.surfaces.is_empty() {
                return cfg(format!("entity type {} has no surfaces", t.name));
            }
            for s in &t.surfaces {
                if s.trim() != s
                    || s.is_empty()
                    || s.contains(['\n', '\t', '\r', '!', '?'])
                    || s.contains(". ")
                    || s.ends_with('.')
                {
                    return cfg(format!("surface {s:?} of {} would disturb sentence splitting", t.name));
                }
            }
        }
        Ok(())
    }

    /// Word groups meant to be near-synonyms: each relation's cue list and the
    /// negative cue list. Used to build matching synthetic embeddings.
    pub fn synonym_groups(&self) -> Vec<Vec<String>> {
        let mut groups: Vec<Vec<String>> = Vec::new();
        let mut push = |g: Vec<String>| {
            if g.len() > 1 && !groups.contains(&g) {
                groups.push(g);
            }
        };
        for r in &self.relations {
            push(r.cues.clone());
            push(if r.negative_cues.is_empty() {
                NEGATIVE_CUES.iter().map(|s| s.to_string()).collect()
            } else {
                r.negative_cues.clone()
            });
        }
        groups
    }

    /// Every word the generator can emit outside the synonym groups.
    pub fn background_words(&self) -> Vec<String> {
        let mut words: Vec<String> = Vec::new();
        let mut add = |s: &str| {
            for w in s.split(|c: char| !c.is_alphanumeric() && c != '-') {
                if !w.is_empty() {
                    words.push(w.to_string());
                }
            }
        };
        for (a, _, _, z) in PAIR_TEMPLATES {
            add(a);
            add(z);
        }
        for s in GAP_WORDS.iter().chain(FILLERS).chain([&OPENING]) {
            add(s);
        }
        add("Previously in clinic was discussed There also mentioned");
        for t in &self.entity_types {
            for s in &t.surfaces {
                add(s);
            }
        }
        words.sort();
        words.dedup();
        words
    }
}

struct Builder {
    text: String,
    chars: usize,
    mentions: Vec<EntityMention>,
}

impl Builder {
    fn push(&mut self, s: &str) {
        self.text.push_str(s);
        self.chars += s.chars().count();
    }

    fn word(&mut self, s: &str) {
        if !self.text.is_empty() && !self.text.ends_with(' ') {
            self.push(" ");
        }
        self.push(s);
    }

    fn mention(&mut self, entity_type: &str, surface: &str) -> String {
        self.word("");
        let id = format!("T{}", self.mentions.len() + 1);
        let start = self.chars;
        self.push(surface);
        self.mentions.push(EntityMention {
            id: id.clone(),
            entity_type: entity_type.to_string(),
            start,
            end: self.chars,
            surface: surface.to_string(),
        });
        id
    }

    fn sentence_break(&mut self) {
        if !self.text.is_empty() {
            self.push(" ");
        }
    }
}

fn count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    let base = mean.floor();
    base as usize + usize::from(rng.random::<f64>() < mean - base)
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct Generator<'a> {
    cfg: &'a GeneratorConfig,
    cum_weights: Vec<f64>,
}

impl Generator<'_> {
    fn surface(&self, rng: &mut ChaCha8Rng, entity_type: &str) -> String {
        let lex = self
            .cfg
            .entity_types
            .iter()
            .find(|t| t.name == entity_type)
            .expect("validated");
        pick(rng, &lex.surfaces).clone()
    }

    fn relation(&self, rng: &mut ChaCha8Rng) -> &RelationSpec {
        let total = *self.cum_weights.last().expect("validated");
        let x = rng.random::<f64>() * total;
        let i = self.cum_weights.iter().position(|&c| x < c).unwrap_or(self.cum_weights.len() - 1);
        &self.cfg.relations[i]
    }

    /// Writes a one-sentence pair: `<opener> A <cue> B <closer>`.
    fn pair_sentence(
        &self,
        rng: &mut ChaCha8Rng,
        b: &mut Builder,
        first: (&str, &str),
        second: (&str, &str),
        cue: &str,
    ) -> (String, String) {
        let (opener, _, _, closer) = pick(rng, PAIR_TEMPLATES);
        b.sentence_break();
        b.word(opener);
        let a = b.mention(first.0, first.1);
        b.word(cue);
        let c = b.mention(second.0, second.1);
        b.word(closer);
        (a, c)
    }

    fn document(&self, index: usize) -> Document {
        let cfg = self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        let mut b = Builder {
            text: String::new(),
            chars: 0,
            mentions: Vec::new(),
        };
        let mut relations = Vec::new();
        b.push(OPENING);
        let blocks = if cfg.relations.is_empty() { 0 } else { count(&mut rng, cfg.positives_per_document) };
        for block in 0..blocks {
            if cfg.separate_blocks && block > 0 {
                b.sentence_break();
                b.push(pick(&mut rng, FILLERS));
            }
            let rel = self.relation(&mut rng);
            let lt = pick(&mut rng, &rel.left).clone();
            let rt = pick(&mut rng, &rel.right).clone();
            let (ls, rs) = (self.surface(&mut rng, &lt), self.surface(&mut rng, &rt));
            let cues: Vec<&str> = if rel.cues.is_empty() {
                FALLBACK_CUES.to_vec()
            } else {
                rel.cues.iter().map(String::as_str).collect()
            };
            let cue = *pick(&mut rng, &cues);
            let left_first = rng.random::<bool>();
            let (first, second) = if left_first {
                ((lt.as_str(), ls.as_str()), (rt.as_str(), rs.as_str()))
            } else {
                ((rt.as_str(), rs.as_str()), (lt.as_str(), ls.as_str()))
            };
            let (a, c) = if rng.random::<f64>() < rel.intra_fraction {
                self.pair_sentence(&mut rng, &mut b, first, second, cue)
            } else {
                b.sentence_break();
                b.word("Previously");
                let a = b.mention(first.0, first.1);
                b.word(cue);
                b.word("in clinic.");
                b.sentence_break();
                let gap = rng.random_range(0..=cfg.max_inter_gap);
                let c = if gap == 0 {
                    b.mention(second.0, &capitalize(second.1))
                } else {
                    for g in 0..gap {
                        let w = pick(&mut rng, GAP_WORDS);
                        b.word(&if g == 0 { capitalize(w) } else { w.to_string() });
                    }
                    b.mention(second.0, second.1)
                };
                b.word("was discussed.");
                (a, c)
            };
            let (left, right) = if left_first { (a, c) } else { (c, a) };
            relations.push(RelationAnnotation {
                id: format!("R{}", relations.len() + 1),
                relation: rel.name.clone(),
                left,
                right,
            });

            // extras in random order: 0 distractor, 1 co-mention, 2 filler
            let mut extras: Vec<u8> = Vec::new();
            extras.extend(std::iter::repeat_n(0, count(&mut rng, cfg.distractor_density)));
            extras.extend(std::iter::repeat_n(1, count(&mut rng, cfg.negative_density)));
            extras.extend(std::iter::repeat_n(2, count(&mut rng, cfg.filler_density)));
            for i in (1..extras.len()).rev() {
                let j = rng.random_range(0..=i);
                extras.swap(i, j);
            }
            for e in extras {
                if cfg.separate_blocks {
                    b.sentence_break();
                    b.push(pick(&mut rng, FILLERS));
                }
                match e {
                    0 => {
                        let pool: Vec<&String> = rel.left.iter().chain(&rel.right).collect();
                        let t = (*pick(&mut rng, &pool)).clone();
                        let s = self.surface(&mut rng, &t);
                        b.sentence_break();
                        b.word("There was also");
                        b.mention(&t, &s);
                        b.word("mentioned.");
                    }
                    1 => {
                        let lt = pick(&mut rng, &rel.left).clone();
                        let rt = pick(&mut rng, &rel.right).clone();
                        let (ls, rs) = (self.surface(&mut rng, &lt), self.surface(&mut rng, &rt));
                        let neg: Vec<&str> = if rel.negative_cues.is_empty() {
                            NEGATIVE_CUES.to_vec()
                        } else {
                            rel.negative_cues.iter().map(String::as_str).collect()
                        };
                        let cue = *pick(&mut rng, &neg);
                        if rng.random::<bool>() {
                            self.pair_sentence(&mut rng, &mut b, (&lt, &ls), (&rt, &rs), cue);
                        } else {
                            self.pair_sentence(&mut rng, &mut b, (&rt, &rs), (&lt, &ls), cue);
                        }
                    }
                    _ => {
                        b.sentence_break();
                        b.push(pick(&mut rng, FILLERS));
                    }
                }
            }
        }
        Document {
            id: format!("{}{:04}", cfg.id_prefix, index + 1),
            text: b.text,
            mentions: b.mentions,
            relations,
        }
    }
}

/// Generates a corpus; a pure function of the config (including its seed).
pub fn generate_synthetic_corpus(cfg: &GeneratorConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut acc = 0.0;
    let cum_weights = cfg
        .relations
        .iter()
        .map(|r| {
            acc += r.weight;
            acc
        })
        .collect();
    let g = Generator { cfg, cum_weights };
    let documents = (0..cfg.documents).map(|i| g.document(i)).collect();
    Corpus::new(cfg.schema(), documents)
}

impl Default for GeneratorConfig {
    /// Sixteen entity types and sixteen relation types modelled on breast
    /// cancer follow-up letters. Relation weights follow the annotation
    /// counts reported for the original corpus, whose total (1569) is the
    /// expected relation count at the default size.
    fn default() -> Self {
        let ty = |name: &str, abbreviation: &str, surfaces: &[&str]| TypeLexicon {
            name: name.into(),
            abbreviation: abbreviation.into(),
            surfaces: surfaces.iter().map(|s| s.to_string()).collect(),
        };
        let rel = |name: &str, left: &[&str], right: &[&str], weight: f64, intra: f64, cues: &[&str]| RelationSpec {
            name: name.into(),
            left: left.iter().map(|s| s.to_string()).collect(),
            right: right.iter().map(|s| s.to_string()).collect(),
            intra_fraction: intra,
            weight,
            cues: cues.iter().map(|s| s.to_string()).collect(),
            negative_cues: Vec::new(),
        };
        GeneratorConfig {
            seed: 1,
            documents: 200,
            positives_per_document: 7.845,
            distractor_density: 0.3,
            negative_density: 0.5,
            filler_density: 0.5,
            max_inter_gap: 8,
            separate_blocks: false,
            id_prefix: default_prefix(),
            entity_types: vec![
                ty("TimeDescriptor", "TD", &["remains on", "since 2011", "in 2009", "currently", "last year", "for five years", "previously", "until March", "in June 2012", "ongoing"]),
                ty("Therapy", "TP", &["tamoxifen", "letrozole", "anastrozole", "exemestane", "radiotherapy", "chemotherapy", "herceptin", "mastectomy", "lumpectomy", "zoladex"]),
                ty("EndocrineTherapy", "ET", &["Arimidex", "Femara", "Aromasin", "Nolvadex", "Fareston"]),
                ty("Followup", "FU", &["review", "follow-up visit", "clinic appointment", "mammogram review", "telephone review"]),
                ty("ClinicalFinding", "CF", &["hot flushes", "joint pain", "fatigue", "nausea", "lymphoedema", "a lump", "breast pain", "night sweats", "osteoporosis", "weight gain"]),
                ty("TestResult", "TR", &["normal", "clear", "no evidence of recurrence", "stable", "raised", "benign", "abnormal", "unremarkable"]),
                ty("TestName", "TN", &["mammogram", "ultrasound", "bone scan", "CT scan", "blood tests", "MRI", "DEXA scan", "biopsy"]),
                ty("Outcome", "O", &["risk of recurrence", "prognosis", "survival", "relapse risk", "concern"]),
                ty("YesRecurrence", "YR", &["local recurrence", "metastatic disease", "recurrent disease", "new primary"]),
                ty("NoRecurrence", "NR", &["no recurrence", "disease free", "remission", "no sign of disease"]),
                ty("Comorbidity", "Com", &["diabetes", "hypertension", "asthma", "arthritis", "depression"]),
                ty("ClinicalSeverity", "CS", &["mild", "severe", "moderate", "significant", "minor"]),
                ty("Referral", "Ref", &["referral", "second opinion", "specialist review", "oncology opinion"]),
                ty("Other", "Oth", &["physiotherapy", "dietitian", "counselling", "GP"]),
                ty("Disease", "Dis", &["breast cancer", "DCIS", "carcinoma", "ductal cancer"]),
                ty("DiseaseContext", "DisCont", &["left breast", "right breast", "grade 2", "node positive", "ER positive"]),
            ],
            relations: vec![
                rel("TherapyTiming", &["TimeDescriptor"], &["Therapy", "EndocrineTherapy"], 428.0, 0.9, &["started", "commenced", "began", "initiated", "continued", "resumed"]),
                rel("NextReview", &["Followup"], &["Therapy"], 164.0, 0.9, &["scheduled", "booked", "arranged", "planned", "organised", "set"]),
                rel("Toxicity", &["Therapy"], &["ClinicalFinding", "TestResult"], 163.0, 0.9, &["caused", "induced", "triggered", "provoked", "produced", "precipitated"]),
                rel("TestTiming", &["TestName"], &["TimeDescriptor", "Therapy"], 184.0, 0.9, &["performed", "executed", "carried", "undertaken", "conducted", "completed"]),
                rel("TestFinding", &["TestName"], &["TestResult"], 136.0, 0.85, &["showed", "revealed", "demonstrated", "indicated", "confirmed", "displayed"]),
                rel("Threat", &["Outcome"], &["ClinicalFinding", "TestResult"], 32.0, 0.9, &["threatened", "worsened", "jeopardised", "endangered", "compromised", "affected"]),
                rel("Intervention", &["Therapy"], &["YesRecurrence"], 5.0, 0.9, &["treated", "managed", "controlled", "addressed", "handled", "tackled"]),
                rel("EffectOf", &["Comorbidity"], &["ClinicalFinding"], 3.0, 0.9, &["aggravated", "exacerbated", "intensified", "amplified", "heightened", "compounded"]),
                rel("Severity", &["ClinicalFinding"], &["ClinicalSeverity"], 75.0, 0.9, &["graded", "rated", "classed", "scored", "judged", "assessed"]),
                rel("RecurLink", &["YesRecurrence"], &["YesRecurrence", "ClinicalFinding"], 7.0, 0.9, &["accompanied", "joined", "coincided", "paralleled", "matched", "mirrored"]),
                rel("RecurInfer", &["NoRecurrence", "YesRecurrence"], &["TestResult"], 51.0, 0.9, &["excluded", "ruled", "refuted", "disproved", "negated", "dismissed"]),
                rel("GetOpinion", &["Referral"], &["ClinicalFinding", "Other"], 4.0, 0.9, &["sought", "requested", "asked", "obtained", "pursued", "solicited"]),
                rel("Context", &["Disease"], &["DiseaseContext"], 40.0, 0.9, &["located", "situated", "found", "sited", "placed", "positioned"]),
                rel("TestToAssess", &["TestName"], &["ClinicalFinding", "TestResult"], 36.0, 0.75, &["investigated", "examined", "evaluated", "explored", "probed", "checked"]),
                rel("TimeStamp", &["TimeDescriptor"], &["Therapy"], 221.0, 0.9, &["dated", "timed", "logged", "recorded", "noted", "registered"]),
                rel("TimeLink", &["Therapy"], &["Therapy"], 20.0, 0.9, &["followed", "preceded", "succeeded", "replaced", "superseded", "trailed"]),
            ],
        }
    }
}

impl GeneratorConfig {
    /// One relation between test names and findings whose annotated
    /// sentences use one of ten near-synonymous verbs and whose unannotated
    /// co-mention sentences use one of ten others. Every pair sits in its own
    /// sentence, fenced off by fillers. Only the verb separates the classes,
    /// so a model generalizes from few examples only if it knows the
    /// synonyms.
    pub fn synonym_cluster(seed: u64, documents: usize) -> Self {
        let base = GeneratorConfig::default();
        let keep = |name: &str| base.entity_types.iter().find(|t| t.name == name).cloned().expect("default type");
        let words = |ws: &[&str]| ws.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        GeneratorConfig {
            seed,
            documents,
            positives_per_document: 2.0,
            distractor_density: 0.0,
            negative_density: 2.0,
            filler_density: 0.0,
            max_inter_gap: 0,
            separate_blocks: true,
            id_prefix: "syn".into(),
            entity_types: vec![keep("TestName"), keep("ClinicalFinding")],
            relations: vec![RelationSpec {
                name: "TestToAssess".into(),
                left: words(&["TestName"]),
                right: words(&["ClinicalFinding"]),
                intra_fraction: 1.0,
                weight: 1.0,
                cues: words(&[
                    "investigated", "examined", "evaluated", "explored", "probed",
                    "checked", "assessed", "inspected", "scrutinised", "surveyed",
                ]),
                negative_cues: words(&[
                    "ignored", "overlooked", "skipped", "omitted", "neglected",
                    "bypassed", "missed", "disregarded", "excluded", "dropped",
                ]),
            }],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::split_sentences;

    fn one_relation(intra: f64) -> GeneratorConfig {
        let mut cfg = GeneratorConfig::default();
        cfg.seed = 7;
        cfg.documents = 50;
        cfg.relations.truncate(1);
        cfg.relations[0].intra_fraction = intra;
        cfg
    }

    fn sentence_of(doc: &Document, offset: usize) -> usize {
        split_sentences(&doc.text).iter().position(|s| s.end > offset).unwrap()
    }

    #[test]
    fn intra_fraction_one_keeps_every_pair_in_one_sentence() {
        let c = generate_synthetic_corpus(&one_relation(1.0)).unwrap();
        assert!(c.relation_count() > 0);
        for d in &c.documents {
            for r in &d.relations {
                let (a, b) = (d.mention(&r.left).unwrap(), d.mention(&r.right).unwrap());
                assert_eq!(sentence_of(d, a.start), sentence_of(d, b.start), "{}: {:?}", d.id, r);
            }
        }
    }

    #[test]
    fn cross_sentence_pairs_are_adjacent() {
        let c = generate_synthetic_corpus(&one_relation(0.0)).unwrap();
        for d in &c.documents {
            for r in &d.relations {
                let (a, b) = (d.mention(&r.left).unwrap(), d.mention(&r.right).unwrap());
                let (sa, sb) = (sentence_of(d, a.start), sentence_of(d, b.start));
                assert_eq!(sa.abs_diff(sb), 1, "{}: {:?}\n{}", d.id, r, d.text);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = one_relation(0.5);
        assert_eq!(generate_synthetic_corpus(&cfg).unwrap(), generate_synthetic_corpus(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 8;
        assert_ne!(generate_synthetic_corpus(&cfg).unwrap(), generate_synthetic_corpus(&other).unwrap());
    }

    #[test]
    fn relation_total_tracks_configuration() {
        let mut cfg = GeneratorConfig::default();
        cfg.seed = 1;
        cfg.documents = 200;
        cfg.relations.truncate(12);
        for (i, r) in cfg.relations.iter_mut().enumerate() {
            r.intra_fraction = [1.0, 0.8, 0.5, 0.9][i % 4];
        }
        cfg.positives_per_document = 4.0;
        let c = generate_synthetic_corpus(&cfg).unwrap();
        let expected = cfg.documents as f64 * cfg.positives_per_document;
        let got = c.relation_count() as f64;
        assert!((got - expected).abs() <= 0.1 * expected, "{got} vs {expected}");
    }

    #[test]
    fn empty_argument_set_is_a_config_error() {
        let mut cfg = one_relation(1.0);
        cfg.relations[0].left.clear();
        assert!(matches!(generate_synthetic_corpus(&cfg), Err(CorpusError::Config(_))));
    }

    #[test]
    fn toml_round_trip() {
        let cfg = GeneratorConfig::default();
        assert_eq!(GeneratorConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
