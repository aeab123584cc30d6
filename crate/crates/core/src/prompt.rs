//! Prompt assembly for one batch of target functions.
//!
//! The user prompt is five sections joined by a single blank line: intro,
//! strategy fragment, preservation rules, additional constraints, and the
//! code (headers, globals, then each target definition).

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::PromptError;
use crate::extractor::{FileContext, FunctionDef, Language};
use crate::strategies::{Strategy, StrategyKey};

pub const SYSTEM_PROMPT: &str = "You are an intelligent coding assistant who is expert in writing, \
editing, refactoring and debugging code. You listen to exact instructions and specialize in systems \
programming and use of C, C++ and C# languages with Windows platforms";

const SECTION_JOIN: &str = "\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
    pub target_names: Vec<String>,
    pub strategy: StrategyKey,
    pub language: Language,
    pub token_estimate: usize,
}

impl PromptBundle {
    /// Stable content hash of the system and user text; names replay transcripts.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.system_text.as_bytes());
        hasher.update([0u8]);
        hasher.update(self.user_text.as_bytes());
        hex::encode(hasher.finalize())
    }

    /// The prompt as one document, system part first.
    pub fn render(&self) -> String {
        format!("{}{SECTION_JOIN}{}", self.system_text, self.user_text)
    }
}

/// `ceil(bytes / 4)`.
pub fn estimate_tokens(text: &str) -> usize {
    text.len().div_ceil(4)
}

pub fn gen_prompt(
    strategy: &Strategy,
    targets: &[&FunctionDef],
    ctx: &FileContext,
    context_window: Option<usize>,
) -> Result<PromptBundle, PromptError> {
    if targets.is_empty() {
        return Err(PromptError::EmptyTargets);
    }
    if let Some(foreign) = targets.iter().find(|t| !ctx.functions.contains(t)) {
        return Err(PromptError::ForeignTarget(foreign.name.clone()));
    }
    let mut targets = targets.to_vec();
    targets.sort_by_key(|t| t.ordinal);

    let language = ctx.file.language;
    let count = targets.len();
    let names = targets
        .iter()
        .map(|t| format!("{}()", t.name))
        .collect::<Vec<_>>()
        .join(", ");

    let sections = [
        intro(count, &names, language),
        strategy.fragment.to_string(),
        preserve_rules(count, &names),
        additional_constraints(&names, language),
        code_section(ctx, &targets),
    ];
    let user_text = sections.join(SECTION_JOIN);
    let system_text = SYSTEM_PROMPT.to_string();
    let token_estimate = estimate_tokens(&system_text) + estimate_tokens(&user_text);
    if let Some(window) = context_window {
        if token_estimate > window {
            return Err(PromptError::ContextOverflow {
                estimate: token_estimate,
                window,
            });
        }
    }

    Ok(PromptBundle {
        system_text,
        user_text,
        target_names: targets.iter().map(|t| t.name.clone()).collect(),
        strategy: strategy.key.clone(),
        language,
        token_estimate,
    })
}

fn intro(count: usize, names: &str, language: Language) -> String {
    format!(
        "Below this prompt you are provided headers, global variables, class and struct definitions \
and {count} global function definition(s) from a {lang} source code file. The parameters of the \
functions also have specific types. As an intelligent coding assistant, GENERATE one VARIANT of each \
of these functions: ***{names}*** following these instructions:",
        lang = language.name(),
    )
}

fn preserve_rules(count: usize, names: &str) -> String {
    format!(
        "REMEMBER, the generated code MUST MAINTAIN the same FUNCTIONALITY as the original code. \
Keep the usage of globally declared variables as it is. Modify ONLY the {count} free/global \
function(s) named ***{names}***. If you find any custom functions/custom structure/class \
objects/custom types/custom variables that are used inside the given {count} function(s) but not \
in the provided code snippet, you can safely assume that these are defined elsewhere and you should \
use them in your generated code as it is. DO NOT modify the names of these and do not redefine them."
    )
}

fn example_code(language: Language) -> String {
    let tag = language.name();
    match language {
        Language::C => format!(
            "```{tag}\n\n#include <stdio.h>\n\nint func(int a) {{\n        printf(\"%d\", a);\n        return a + 1;\n    }}\n\n```"
        ),
        Language::Cpp => format!(
            "```{tag}\n\n#include<iostream>\n\nint func(int a) {{\n        cout << a <<endl;\n        return a + 1;\n    }}\n\n```"
        ),
    }
}

fn additional_constraints(names: &str, language: Language) -> String {
    let tag = language.name();
    let example = example_code(language);
    format!(
        "These CRUCIAL instructions below MUST ALWAYS BE FOLLOWED while generating variants:
1. You MUST NOT regenerate the extra information I provided to you such as headers, global variables, structs and classes for context.
2. If you modify the functions ***{names}***, you MUST NOT regenerate the original code. But if a function cannot be changed, then include the original code.
3. ONLY generate the function variants and any new headers/libraries you used.
4. You MUST NOT generate any extra natural language messages/comments.
5. You MUST Generate all the modified functions within a single ```{tag}  ``` tag. For example your response should look like this for one generated function named `int func(int a)`:

{example}

Remember, if you have generated multiple functions, you should include all of them within the same ```{tag}  ``` tag.
6. Use the global variables as they are inside your generated functions and do not change/redeclare the global variables.
7. Always complete the function that you generate. Make sure to fill up the function body with the appropriate code. DO NOT leave any function incomplete.

8. DO NOT change the function name, return type, parameters and their types, or the name and number of parameters of the original functions while generating variants."
    )
}

fn code_section(ctx: &FileContext, targets: &[&FunctionDef]) -> String {
    let headers = ctx
        .headers
        .iter()
        .map(|h| h.text.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    let globals = ctx
        .globals
        .iter()
        .map(|g| g.text.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    let mut parts: Vec<&str> = Vec::new();
    if !headers.is_empty() {
        parts.push(&headers);
    }
    if !globals.is_empty() {
        parts.push(&globals);
    }
    parts.extend(targets.iter().map(|t| t.body_text.as_str()));
    format!("Here is the code : \n{}", parts.join(SECTION_JOIN))
}
