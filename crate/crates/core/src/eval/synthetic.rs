//! Seeded synthetic corpora of Java-like classes.
//!
//! A family is a class template: a class name, some fields, and three
//! methods with their JavaDoc, signatures and bodies. Every instance of a
//! family shares the same method bodies, so it shares the same three
//! sketches. Noise only perturbs context tokens (class-name words, field
//! types, JavaDoc words, method-name words, parameter and local names),
//! never anything a sketch depends on.

use std::collections::HashSet;

use rand::Rng as _;

use super::tasks::{make_tasks, RetrievalTask};
use crate::context::{parse_source, ClassUnit};
use crate::error::Result;
use crate::rng::{derive_seed, rng, Rng};

struct MethodTemplate {
    doc: &'static str,
    ret: &'static str,
    name: &'static [&'static str],
    params: &'static [(&'static str, &'static str)],
    /// Statements; `${x}` marks a renamable local or parameter `x`.
    body: &'static str,
}

/// An instantiable method template.
struct Method {
    doc: String,
    ret: String,
    name: Vec<String>,
    params: Vec<(String, String)>,
    body: String,
}

impl From<&MethodTemplate> for Method {
    fn from(m: &MethodTemplate) -> Self {
        Self {
            doc: m.doc.to_owned(),
            ret: m.ret.to_owned(),
            name: m.name.iter().map(|w| w.to_string()).collect(),
            params: m
                .params
                .iter()
                .map(|(t, n)| (t.to_string(), n.to_string()))
                .collect(),
            body: m.body.to_owned(),
        }
    }
}

/// A family ready to render: class-name words, fields, methods.
struct Family {
    class: Vec<String>,
    fields: Vec<(String, String)>,
    methods: Vec<Method>,
}

struct FamilyTemplate {
    class: &'static [&'static str],
    fields: &'static [(&'static str, &'static str)],
    methods: [MethodTemplate; 3],
}

const FAMILIES: [FamilyTemplate; 8] = [
    FamilyTemplate {
        class: &["Text", "File", "Reader"],
        fields: &[("File", "sourceFile"), ("String", "encoding")],
        methods: [
            MethodTemplate {
                doc: "read all lines from the given file into one string",
                ret: "String",
                name: &["read", "All", "Lines"],
                params: &[("File", "file")],
                body: "FileReader ${fr} = new FileReader(${file});
BufferedReader ${br} = new BufferedReader(${fr});
StringBuilder ${sb} = new StringBuilder();
String ${line} = ${br}.readLine();
while (${line} != null) {
  ${sb}.append(${line});
  ${line} = ${br}.readLine();
}
${br}.close();
return ${sb}.toString();",
            },
            MethodTemplate {
                doc: "write the text content to the target file",
                ret: "void",
                name: &["write", "Text"],
                params: &[("File", "target"), ("String", "content")],
                body: "FileWriter ${fw} = new FileWriter(${target});
BufferedWriter ${bw} = new BufferedWriter(${fw});
${bw}.write(${content});
${bw}.newLine();
${bw}.flush();
${bw}.close();",
            },
            MethodTemplate {
                doc: "check whether the file exists and is not empty",
                ret: "boolean",
                name: &["is", "Readable"],
                params: &[("File", "file")],
                body: "if (${file}.exists()) {
  return ${file}.length() > 0;
}
return false;",
            },
        ],
    },
    FamilyTemplate {
        class: &["Simple", "Window", "Builder"],
        fields: &[("JFrame", "mainFrame"), ("JPanel", "contentPanel")],
        methods: [
            MethodTemplate {
                doc: "create a new visible frame with the given title",
                ret: "JFrame",
                name: &["create", "Frame"],
                params: &[("String", "title")],
                body: "JFrame ${frame} = new JFrame(${title});
${frame}.setSize(400, 300);
${frame}.setDefaultCloseOperation(JFrame.EXIT_ON_CLOSE);
${frame}.setVisible(true);
return ${frame};",
            },
            MethodTemplate {
                doc: "make an enabled button showing the label",
                ret: "JButton",
                name: &["make", "Button"],
                params: &[("String", "label")],
                body: "JButton ${button} = new JButton(${label});
${button}.setEnabled(true);
return ${button};",
            },
            MethodTemplate {
                doc: "add a button to the panel and refresh the layout",
                ret: "void",
                name: &["add", "To", "Panel"],
                params: &[("JPanel", "panel"), ("JButton", "button")],
                body: "${panel}.add(${button});
${panel}.revalidate();
${panel}.repaint();
${panel}.setVisible(true);",
            },
        ],
    },
    FamilyTemplate {
        class: &["Http", "Client", "Helper"],
        fields: &[("Socket", "socket"), ("int", "timeout")],
        methods: [
            MethodTemplate {
                doc: "open a connection to the remote host and port",
                ret: "Socket",
                name: &["open", "Connection"],
                params: &[("String", "host"), ("int", "port")],
                body: "Socket ${s} = new Socket(${host}, ${port});
${s}.setSoTimeout(5000);
${s}.setKeepAlive(true);
return ${s};",
            },
            MethodTemplate {
                doc: "download the page content from the url address",
                ret: "InputStream",
                name: &["fetch", "Page"],
                params: &[("String", "address")],
                body: "URL ${url} = new URL(${address});
URLConnection ${conn} = ${url}.openConnection();
${conn}.setConnectTimeout(1000);
${conn}.connect();
return ${conn}.getInputStream();",
            },
            MethodTemplate {
                doc: "send a request message over the socket stream",
                ret: "void",
                name: &["send", "Message"],
                params: &[("Socket", "socket"), ("String", "message")],
                body: "try {
  OutputStream ${out} = ${socket}.getOutputStream();
  PrintWriter ${writer} = new PrintWriter(${out});
  ${writer}.println(${message});
  ${writer}.flush();
} catch (IOException ${e}) {
  ${e}.printStackTrace();
}",
            },
        ],
    },
    FamilyTemplate {
        class: &["Inventory", "Item", "List"],
        fields: &[("ArrayList", "items"), ("HashMap", "index")],
        methods: [
            MethodTemplate {
                doc: "collect the remaining names into a new list",
                ret: "ArrayList",
                name: &["collect", "Names"],
                params: &[("Iterator", "source")],
                body: "ArrayList ${result} = new ArrayList();
while (${source}.hasNext()) {
  ${result}.add(${source}.next());
}
return ${result};",
            },
            MethodTemplate {
                doc: "count how many times each key appears in the list",
                ret: "HashMap",
                name: &["count", "Keys"],
                params: &[("ArrayList", "keys")],
                body: "HashMap ${counts} = new HashMap();
Iterator ${it} = ${keys}.iterator();
while (${it}.hasNext()) {
  Object ${key} = ${it}.next();
  if (${counts}.containsKey(${key})) {
    ${counts}.put(${key}, ${counts}.get(${key}));
  } else {
    ${counts}.put(${key}, 1);
  }
}
return ${counts};",
            },
            MethodTemplate {
                doc: "remove every entry from the inventory table",
                ret: "void",
                name: &["clear", "All"],
                params: &[("HashMap", "table")],
                body: "${table}.clear();",
            },
        ],
    },
    FamilyTemplate {
        class: &["Report", "Text", "Formatter"],
        fields: &[("StringBuilder", "buffer"), ("String", "separator")],
        methods: [
            MethodTemplate {
                doc: "join the trimmed words with a separator",
                ret: "String",
                name: &["join", "Words"],
                params: &[("String", "text"), ("String", "separator")],
                body: "String[] ${parts} = ${text}.split(\" \");
StringBuilder ${sb} = new StringBuilder();
${sb}.append(${separator});
${sb}.append(${text}.trim());
${sb}.reverse();
return ${sb}.toString();",
            },
            MethodTemplate {
                doc: "find the first match of the regular pattern in the input",
                ret: "boolean",
                name: &["contains", "Pattern"],
                params: &[("String", "regex"), ("String", "input")],
                body: "Pattern ${p} = Pattern.compile(${regex});
Matcher ${m} = ${p}.matcher(${input});
return ${m}.find();",
            },
            MethodTemplate {
                doc: "convert the value to upper case without spaces",
                ret: "String",
                name: &["normalize", "Value"],
                params: &[("String", "value")],
                body: "if (${value}.isEmpty()) {
  return \"\";
}
return ${value}.trim().toUpperCase();",
            },
        ],
    },
    FamilyTemplate {
        class: &["Customer", "Database", "Access"],
        fields: &[("Connection", "connection"), ("String", "jdbcUrl")],
        methods: [
            MethodTemplate {
                doc: "open a database connection with the user credentials",
                ret: "Connection",
                name: &["connect", "Database"],
                params: &[
                    ("String", "url"),
                    ("String", "user"),
                    ("String", "password"),
                ],
                body: "Connection ${c} = DriverManager.getConnection(${url}, ${user}, ${password});
${c}.setAutoCommit(false);
return ${c};",
            },
            MethodTemplate {
                doc: "run the sql query and count the result rows",
                ret: "int",
                name: &["count", "Rows"],
                params: &[("Connection", "conn"), ("String", "sql")],
                body: "Statement ${st} = ${conn}.createStatement();
ResultSet ${rs} = ${st}.executeQuery(${sql});
int ${n} = 0;
while (${rs}.next()) {
  ${n}++;
}
${rs}.close();
${st}.close();
return ${n};",
            },
            MethodTemplate {
                doc: "commit the transaction or roll back on failure",
                ret: "void",
                name: &["commit", "Work"],
                params: &[("Connection", "conn")],
                body: "try {
  ${conn}.commit();
} catch (SQLException ${e}) {
  ${conn}.rollback();
}",
            },
        ],
    },
    FamilyTemplate {
        class: &["Background", "Task", "Worker"],
        fields: &[("ExecutorService", "executor"), ("Lock", "lock")],
        methods: [
            MethodTemplate {
                doc: "start a worker thread and wait for it to finish",
                ret: "void",
                name: &["run", "And", "Wait"],
                params: &[("Runnable", "task")],
                body: "Thread ${t} = new Thread(${task});
${t}.start();
try {
  ${t}.join();
} catch (InterruptedException ${e}) {
  Thread.currentThread().interrupt();
}",
            },
            MethodTemplate {
                doc: "submit the job to a fixed thread pool",
                ret: "Future",
                name: &["submit", "Job"],
                params: &[("Callable", "job")],
                body: "ExecutorService ${pool} = Executors.newFixedThreadPool(4);
Future ${f} = ${pool}.submit(${job});
${pool}.shutdown();
return ${f};",
            },
            MethodTemplate {
                doc: "increment the shared counter while holding the lock",
                ret: "void",
                name: &["safe", "Increment"],
                params: &[("Lock", "guard"), ("AtomicInteger", "counter")],
                body: "${guard}.lock();
try {
  ${counter}.incrementAndGet();
} catch (RuntimeException ${e}) {
  ${guard}.unlock();
}
${guard}.unlock();",
            },
        ],
    },
    FamilyTemplate {
        class: &["Checksum", "Digest", "Util"],
        fields: &[("MessageDigest", "digest"), ("byte[]", "salt")],
        methods: [
            MethodTemplate {
                doc: "compute the secure hash of the input bytes",
                ret: "byte[]",
                name: &["hash", "Bytes"],
                params: &[("byte[]", "data")],
                body: "MessageDigest ${md} = MessageDigest.getInstance(\"SHA-256\");
${md}.update(${data});
return ${md}.digest();",
            },
            MethodTemplate {
                doc: "encode the raw bytes as base64 text",
                ret: "String",
                name: &["encode", "Base64"],
                params: &[("byte[]", "raw")],
                body: "Base64.Encoder ${enc} = Base64.getEncoder();
return ${enc}.encodeToString(${raw});",
            },
            MethodTemplate {
                doc: "generate random salt bytes of the given size",
                ret: "byte[]",
                name: &["random", "Salt"],
                params: &[("int", "size")],
                body: "SecureRandom ${rnd} = new SecureRandom();
ByteBuffer ${bb} = ByteBuffer.allocate(${size});
${rnd}.nextBytes(${bb}.array());
${rnd}.setSeed(${size});
return ${bb}.array();",
            },
        ],
    },
];

/// Replacement words drawn when noise hits a context token.
const DISTRACTOR_WORDS: &[&str] = &[
    "data", "value", "item", "thing", "helper", "manager", "util", "info", "object", "process",
    "handle", "simple", "basic", "main", "temp", "result", "common", "base", "custom", "local",
    "extra", "misc", "generic", "fallback", "core", "internal", "shared", "entry", "node",
    "element",
];

const DISTRACTOR_TYPES: &[&str] = &[
    "Object", "String", "int", "boolean", "List", "Map", "long", "double",
];

/// Word pools for procedurally generated families beyond the hand-written ones.
const PROC_NOUNS: &[&str] = &[
    "Invoice", "Sensor", "Ledger", "Garden", "Ticket", "Planet", "Recipe", "Vessel", "Signal",
    "Meadow", "Harbor", "Lantern", "Quartz", "Falcon", "Summit", "Cipher",
];
const PROC_VERBS: &[&str] = &[
    "load", "store", "merge", "split", "track", "scan", "render", "sync",
];

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Training classes, families interleaved (`family = i % n_families`).
    pub classes: Vec<ClassUnit>,
    pub class_family: Vec<usize>,
    /// Classes withheld from training; the tasks are drawn from these.
    pub held_out: Vec<ClassUnit>,
    pub held_out_family: Vec<usize>,
    pub tasks: Vec<RetrievalTask>,
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn lower_first(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

struct Noise<'a> {
    rate: f64,
    r: &'a mut Rng,
}

impl Noise<'_> {
    fn hit(&mut self) -> bool {
        self.rate > 0.0 && self.r.random::<f64>() < self.rate
    }

    fn word(&mut self, w: &str) -> String {
        if self.hit() {
            DISTRACTOR_WORDS[self.r.random_range(0..DISTRACTOR_WORDS.len())].to_owned()
        } else {
            w.to_owned()
        }
    }

    fn ty(&mut self, t: &str) -> String {
        if self.hit() {
            DISTRACTOR_TYPES[self.r.random_range(0..DISTRACTOR_TYPES.len())].to_owned()
        } else {
            t.to_owned()
        }
    }

    /// A camel-case identifier whose words may be replaced.
    fn ident(&mut self, words: &[String], taken: &mut HashSet<String>) -> String {
        let ws: Vec<String> = words.iter().map(|w| self.word(&w.to_lowercase())).collect();
        let mut name = lower_first(&ws[0]);
        for w in &ws[1..] {
            name.push_str(&capitalize(w));
        }
        let base = name.clone();
        let mut k = 2;
        while !taken.insert(name.clone()) {
            name = format!("{base}{}", capitalize(&"x".repeat(k - 1)));
            k += 1;
        }
        name
    }
}

fn camel_words(ident: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for ch in ident.chars() {
        if ch.is_uppercase() || out.is_empty() {
            out.push(String::new());
        }
        out.last_mut().unwrap().push(ch);
    }
    out
}

/// Renders one method: placeholders renamed consistently, names perturbed.
fn render_method(m: &Method, noise: &mut Noise) -> String {
    let mut taken = HashSet::new();
    let mut names: Vec<(String, String)> = Vec::new();
    let mut params = Vec::new();
    for (ty, name) in &m.params {
        let fresh = noise.ident(&camel_words(name), &mut taken);
        names.push((name.clone(), fresh.clone()));
        params.push(format!("{ty} {fresh}"));
    }
    let mut body = String::new();
    let mut rest = m.body.as_str();
    while let Some(at) = rest.find("${") {
        body.push_str(&rest[..at]);
        let end = at + rest[at..].find('}').expect("unterminated placeholder");
        let key = &rest[at + 2..end];
        let fresh = match names.iter().find(|(k, _)| k.as_str() == key) {
            Some((_, v)) => v.clone(),
            None => {
                let v = noise.ident(&camel_words(key), &mut taken);
                names.push((key.to_owned(), v.clone()));
                v
            }
        };
        body.push_str(&fresh);
        rest = &rest[end + 1..];
    }
    body.push_str(rest);

    let doc: Vec<String> = m.doc.split_whitespace().map(|w| noise.word(w)).collect();
    let name = noise.ident(&m.name, &mut HashSet::new());
    let mut out = format!(
        "  /** {} */\n  public {} {}({}) {{\n",
        doc.join(" "),
        m.ret,
        name,
        params.join(", ")
    );
    for line in body.lines() {
        out.push_str("    ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("  }\n");
    out
}

fn render_class(fam: &Family, noise: &mut Noise) -> String {
    let name: String = fam
        .class
        .iter()
        .map(|w| capitalize(&noise.word(&w.to_lowercase())))
        .collect();
    let mut out = format!("public class {name} {{\n");
    for (ty, f) in &fam.fields {
        out.push_str(&format!("  private {} {};\n", noise.ty(ty), f));
    }
    for m in &fam.methods {
        out.push('\n');
        out.push_str(&render_method(m, noise));
    }
    out.push_str("}\n");
    out
}

/// A family beyond the hand-written ones, built from word pools keyed by `k`.
fn procedural_family(k: usize) -> Family {
    let noun = PROC_NOUNS[k % PROC_NOUNS.len()];
    let tag = format!("{noun}{}", k / PROC_NOUNS.len());
    let verb = |i: usize| PROC_VERBS[(k + i) % PROC_VERBS.len()];
    let lower = noun.to_lowercase();
    let client = format!("{tag}Client");
    let cursor = format!("{tag}Cursor");
    let fault = format!("{tag}Fault");
    let s = |x: &str| x.to_owned();
    let methods = vec![
        Method {
            doc: format!("{} a fresh {lower} client by name", verb(0)),
            ret: client.clone(),
            name: vec![s(verb(0)), s(noun)],
            params: vec![(s("String"), s("name"))],
            body: format!(
                "{client} ${{c}} = new {client}(${{name}});\n${{c}}.open();\n${{c}}.configure(${{name}});\nreturn ${{c}};"
            ),
        },
        Method {
            doc: format!("{} every {lower} record matching the key", verb(1)),
            ret: s("int"),
            name: vec![s(verb(1)), s("Records")],
            params: vec![(client.clone(), s("client")), (s("String"), s("key"))],
            body: format!(
                "{cursor} ${{r}} = ${{client}}.query(${{key}});\nint ${{n}} = 0;\nwhile (${{r}}.hasMore()) {{\n  ${{r}}.advance();\n  ${{n}}++;\n}}\nreturn ${{n}};"
            ),
        },
        Method {
            doc: format!("{} and release the {lower} client", verb(2)),
            ret: s("void"),
            name: vec![s(verb(2)), s("Release")],
            params: vec![(client.clone(), s("client"))],
            body: format!(
                "try {{\n  ${{client}}.flush();\n  ${{client}}.close();\n}} catch ({fault} ${{e}}) {{\n  ${{e}}.report();\n}}"
            ),
        },
    ];
    Family {
        class: vec![s(noun), capitalize(verb(3)), s("Service")],
        fields: vec![(client, s("client")), (s("String"), s("label"))],
        methods,
    }
}

fn family(f: usize) -> Family {
    match FAMILIES.get(f) {
        Some(t) => Family {
            class: t.class.iter().map(|w| w.to_string()).collect(),
            fields: t
                .fields
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            methods: t.methods.iter().map(Method::from).collect(),
        },
        None => procedural_family(f),
    }
}

/// Every `HOLD_OUT_EVERY`-th instance of a family is withheld.
const HOLD_OUT_EVERY: usize = 10;
const TASK_TAG: u64 = 0x7A5C;

/// Source text of the synthetic corpus, one class per string, with the
/// family of each. Training and held-out classes are interleaved as
/// generated; see [`gen_synthetic_corpus`] for the split.
pub fn gen_synthetic_sources(
    n_families: usize,
    per_family: usize,
    noise: f64,
    seed: u64,
) -> Vec<(usize, String)> {
    let rate = noise.clamp(0.0, 1.0);
    let families: Vec<Family> = (0..n_families).map(family).collect();
    let mut out = Vec::with_capacity(n_families * per_family);
    for i in 0..per_family {
        for f in 0..n_families {
            let mut r = rng(derive_seed(seed, (f as u64) << 32 | i as u64));
            let mut nz = Noise { rate, r: &mut r };
            out.push((f, render_class(&families[f], &mut nz)));
        }
    }
    out
}

/// Generates `n_families × per_family` classes and splits off every tenth
/// instance of each family as a held-out retrieval task.
pub fn gen_synthetic_corpus(
    n_families: usize,
    per_family: usize,
    noise: f64,
    seed: u64,
) -> Result<SyntheticCorpus> {
    if n_families < 2 {
        return Err(crate::Error::InvalidArgument(
            "at least two families are required".into(),
        ));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(crate::Error::InvalidArgument(format!(
            "noise rate {noise} is outside [0, 1]"
        )));
    }
    let mut corpus = SyntheticCorpus {
        classes: Vec::new(),
        class_family: Vec::new(),
        held_out: Vec::new(),
        held_out_family: Vec::new(),
        tasks: Vec::new(),
    };
    for (k, (f, text)) in gen_synthetic_sources(n_families, per_family, noise, seed)
        .into_iter()
        .enumerate()
    {
        let unit = parse_source(&text)?
            .into_iter()
            .next()
            .expect("one class per source");
        if (k / n_families) % HOLD_OUT_EVERY == HOLD_OUT_EVERY - 1 {
            corpus.held_out.push(unit);
            corpus.held_out_family.push(f);
        } else {
            corpus.classes.push(unit);
            corpus.class_family.push(f);
        }
    }
    corpus.tasks = make_tasks(
        &corpus.held_out,
        corpus.held_out.len(),
        derive_seed(seed, TASK_TAG),
    )?;
    Ok(corpus)
}
