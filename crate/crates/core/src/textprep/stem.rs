//! Snowball English (Porter2) stemmer.

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_valid_li(c: char) -> bool {
    matches!(c, 'c' | 'd' | 'e' | 'g' | 'h' | 'k' | 'm' | 'n' | 'r' | 't')
}

fn is_double(a: char, b: char) -> bool {
    a == b && matches!(a, 'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't')
}

fn exception1(word: &str) -> Option<&'static str> {
    Some(match word {
        "skis" => "ski",
        "skies" => "sky",
        "dying" => "die",
        "lying" => "lie",
        "tying" => "tie",
        "idly" => "idl",
        "gently" => "gentl",
        "ugly" => "ugli",
        "early" => "earli",
        "only" => "onli",
        "singly" => "singl",
        "sky" => "sky",
        "news" => "news",
        "howe" => "howe",
        "atlas" => "atlas",
        "cosmos" => "cosmos",
        "bias" => "bias",
        "andes" => "andes",
        _ => return None,
    })
}

const EXCEPTION2: [&str; 8] = [
    "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed",
];

struct Word {
    w: Vec<char>,
    p1: usize,
    p2: usize,
}

impl Word {
    fn ends_with(&self, suffix: &str) -> bool {
        let n = suffix.chars().count();
        n <= self.w.len() && self.w[self.w.len() - n..].iter().copied().eq(suffix.chars())
    }

    /// Longest of `suffixes` the word ends with.
    fn longest<'a>(&self, suffixes: &[&'a str]) -> Option<&'a str> {
        suffixes
            .iter()
            .copied()
            .filter(|s| self.ends_with(s))
            .max_by_key(|s| s.len())
    }

    fn suffix_start(&self, suffix: &str) -> usize {
        self.w.len() - suffix.chars().count()
    }

    fn replace(&mut self, suffix: &str, with: &str) {
        let start = self.suffix_start(suffix);
        self.w.truncate(start);
        self.w.extend(with.chars());
    }

    fn has_vowel_before(&self, end: usize) -> bool {
        self.w[..end].iter().any(|&c| is_vowel(c))
    }

    fn as_string(&self) -> String {
        self.w.iter().collect()
    }
}

/// Short syllable at the end of `w`: non-vowel, vowel, non-vowel other than
/// w/x/Y; or a two-letter word of vowel followed by non-vowel.
fn ends_short_syllable(w: &[char]) -> bool {
    let n = w.len();
    if n >= 3 {
        let (a, b, c) = (w[n - 3], w[n - 2], w[n - 1]);
        if !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'w' | 'x' | 'Y') {
            return true;
        }
    }
    n == 2 && is_vowel(w[0]) && !is_vowel(w[1])
}

/// Position just past the first non-vowel that follows a vowel, scanning from `from`.
fn region_after(w: &[char], from: usize) -> usize {
    let n = w.len();
    let mut i = from;
    while i < n && !is_vowel(w[i]) {
        i += 1;
    }
    while i < n && is_vowel(w[i]) {
        i += 1;
    }
    if i < n {
        i + 1
    } else {
        n
    }
}

fn mark_regions(w: &[char]) -> (usize, usize) {
    let s: String = w.iter().collect();
    let p1 = ["gener", "commun", "arsen"]
        .iter()
        .find(|p| s.starts_with(*p))
        .map(|p| p.len())
        .unwrap_or_else(|| region_after(w, 0));
    let p2 = region_after(w, p1);
    (p1, p2)
}

/// Stems one lowercase token. Deterministic and total.
pub fn stem(word: &str) -> String {
    if let Some(s) = exception1(word) {
        return s.to_string();
    }
    if word.chars().count() < 3 {
        return word.to_string();
    }

    let mut w: Vec<char> = word.chars().collect();
    if w[0] == '\'' {
        w.remove(0);
    }
    if w.is_empty() {
        return String::new();
    }
    if w[0] == 'y' {
        w[0] = 'Y';
    }
    for i in 1..w.len() {
        if w[i] == 'y' && is_vowel(w[i - 1]) {
            w[i] = 'Y';
        }
    }
    let (p1, p2) = mark_regions(&w);
    let mut word = Word { w, p1, p2 };

    step1a(&mut word);
    let s = word.as_string();
    if !EXCEPTION2.contains(&s.as_str()) {
        step1b(&mut word);
        step1c(&mut word);
        step2(&mut word);
        step3(&mut word);
        step4(&mut word);
        step5(&mut word);
    }

    word.w.iter().map(|&c| if c == 'Y' { 'y' } else { c }).collect()
}

fn step1a(word: &mut Word) {
    if let Some(suf) = word.longest(&["'s'", "'s", "'"]) {
        word.replace(suf, "");
    }
    let Some(suf) = word.longest(&["sses", "ied", "ies", "us", "ss", "s"]) else {
        return;
    };
    match suf {
        "sses" => word.replace(suf, "ss"),
        "ied" | "ies" => {
            if word.suffix_start(suf) > 1 {
                word.replace(suf, "i")
            } else {
                word.replace(suf, "ie")
            }
        }
        "s" => {
            let start = word.suffix_start(suf);
            if start >= 1 && word.has_vowel_before(start - 1) {
                word.replace(suf, "");
            }
        }
        _ => {}
    }
}

fn step1b(word: &mut Word) {
    let Some(suf) = word.longest(&["eed", "eedly", "ed", "edly", "ing", "ingly"]) else {
        return;
    };
    let start = word.suffix_start(suf);
    match suf {
        "eed" | "eedly" => {
            if start >= word.p1 {
                word.replace(suf, "ee");
            }
        }
        _ => {
            if !word.has_vowel_before(start) {
                return;
            }
            word.w.truncate(start);
            if word.longest(&["at", "bl", "iz"]).is_some() {
                word.w.push('e');
            } else if word.w.len() >= 2 && is_double(word.w[word.w.len() - 2], word.w[word.w.len() - 1]) {
                word.w.pop();
            } else if word.w.len() == word.p1 && ends_short_syllable(&word.w) {
                word.w.push('e');
            }
        }
    }
}

fn step1c(word: &mut Word) {
    let n = word.w.len();
    if n > 2 && matches!(word.w[n - 1], 'y' | 'Y') && !is_vowel(word.w[n - 2]) {
        word.w[n - 1] = 'i';
    }
}

fn step2(word: &mut Word) {
    const SUFFIXES: [&str; 24] = [
        "tional", "enci", "anci", "abli", "entli", "izer", "ization", "ational", "ation", "ator", "alism", "aliti",
        "alli", "fulness", "ousli", "ousness", "iveness", "iviti", "biliti", "bli", "ogi", "fulli", "lessli", "li",
    ];
    let Some(suf) = word.longest(&SUFFIXES) else {
        return;
    };
    let start = word.suffix_start(suf);
    if start < word.p1 {
        return;
    }
    let replacement = match suf {
        "tional" => "tion",
        "enci" => "ence",
        "anci" => "ance",
        "abli" => "able",
        "entli" => "ent",
        "izer" | "ization" => "ize",
        "ational" | "ation" | "ator" => "ate",
        "alism" | "aliti" | "alli" => "al",
        "fulness" | "fulli" => "ful",
        "ousli" | "ousness" => "ous",
        "iveness" | "iviti" => "ive",
        "biliti" | "bli" => "ble",
        "lessli" => "less",
        "ogi" => {
            if start == 0 || word.w[start - 1] != 'l' {
                return;
            }
            "og"
        }
        "li" => {
            if start == 0 || !is_valid_li(word.w[start - 1]) {
                return;
            }
            ""
        }
        _ => unreachable!(),
    };
    word.replace(suf, replacement);
}

fn step3(word: &mut Word) {
    const SUFFIXES: [&str; 9] = [
        "tional", "ational", "alize", "icate", "iciti", "ical", "ful", "ness", "ative",
    ];
    let Some(suf) = word.longest(&SUFFIXES) else {
        return;
    };
    let start = word.suffix_start(suf);
    if start < word.p1 {
        return;
    }
    let replacement = match suf {
        "tional" => "tion",
        "ational" => "ate",
        "alize" => "al",
        "icate" | "iciti" | "ical" => "ic",
        "ful" | "ness" => "",
        "ative" => {
            if start < word.p2 {
                return;
            }
            ""
        }
        _ => unreachable!(),
    };
    word.replace(suf, replacement);
}

fn step4(word: &mut Word) {
    const SUFFIXES: [&str; 18] = [
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ism", "ate", "iti", "ous",
        "ive", "ize", "ion",
    ];
    let Some(suf) = word.longest(&SUFFIXES) else {
        return;
    };
    let start = word.suffix_start(suf);
    if start < word.p2 {
        return;
    }
    if suf == "ion" && !(start > 0 && matches!(word.w[start - 1], 's' | 't')) {
        return;
    }
    word.replace(suf, "");
}

fn step5(word: &mut Word) {
    let n = word.w.len();
    if n == 0 {
        return;
    }
    let start = n - 1;
    match word.w[start] {
        'e' => {
            if start >= word.p2 || (start >= word.p1 && !ends_short_syllable(&word.w[..start])) {
                word.w.pop();
            }
        }
        'l' => {
            if start >= word.p2 && start > 0 && word.w[start - 1] == 'l' {
                word.w.pop();
            }
        }
        _ => {}
    }
}
