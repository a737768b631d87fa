//! Seeded story grammar used as training text for the toy models and as the
//! synthetic human reference set.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Word lists for one story setting.
pub struct Genre {
    pub name: &'static str,
    pub prompt: &'static str,
    heroes: &'static [&'static str],
    companions: &'static [&'static str],
    places: &'static [&'static str],
    objects: &'static [&'static str],
    creatures: &'static [&'static str],
    adjectives: &'static [&'static str],
    actions: &'static [&'static str],
}

pub static GENRES: &[Genre] = &[
    Genre {
        name: "sea",
        prompt: "A sailor finds a map to a city that sank beneath the waves.",
        heroes: &["the old captain", "a young sailor", "the navigator", "Mara", "Tomas", "the cook"],
        companions: &["the first mate", "a talking gull", "her brother", "the ship's boy"],
        places: &["the harbor", "the drowned city", "the reef", "the lighthouse", "the open sea", "a small island"],
        objects: &["a silver compass", "an old map", "a rusted anchor", "a bottle with a letter", "a pearl", "the ship's bell"],
        creatures: &["kraken", "whale", "mermaid", "sea serpent"],
        adjectives: &["salty", "ancient", "glittering", "broken", "deep", "restless"],
        actions: &["sailed toward", "dove into", "rowed past", "drifted near", "swam around", "steered for"],
    },
    Genre {
        name: "forest",
        prompt: "A child gets lost in an enchanted forest and meets a talking fox.",
        heroes: &["the woodcutter", "a little girl", "the hunter", "Elsa", "the miller's son", "an old witch"],
        companions: &["a fox", "the grandmother", "a crow", "the seventh brother"],
        places: &["the dark forest", "a gingerbread cottage", "the old well", "the clearing", "the king's garden", "the hollow oak"],
        objects: &["a golden apple", "a red cloak", "a magic bean", "a glass slipper", "a silver key", "a loaf of bread"],
        creatures: &["wolf", "troll", "dragon", "goblin"],
        adjectives: &["enchanted", "wicked", "gentle", "mossy", "hungry", "tiny"],
        actions: &["wandered into", "hurried through", "tiptoed past", "ran from", "knocked at", "slept near"],
    },
    Genre {
        name: "city",
        prompt: "A detective investigates a murder on a rainy night.",
        heroes: &["the detective", "a tired inspector", "Sam Cole", "the reporter", "a retired cop", "the landlady"],
        companions: &["his partner", "a street kid", "the coroner", "an informant"],
        places: &["the rainy alley", "the precinct", "a smoky bar", "the train station", "the warehouse by the docks", "the mayor's office"],
        objects: &["a bloody glove", "a torn photograph", "a pistol", "an envelope of cash", "a pocket watch", "a cigarette case"],
        creatures: &["gangster", "killer", "thief", "rat"],
        adjectives: &["grim", "crooked", "quiet", "wet", "shadowy", "suspicious"],
        actions: &["drove to", "walked into", "staked out", "searched", "slipped out of", "called"],
    },
    Genre {
        name: "space",
        prompt: "The crew of a damaged starship receives a strange signal.",
        heroes: &["the commander", "a young pilot", "the ship's android", "Doctor Vega", "the engineer", "the lone astronaut"],
        companions: &["the navigation computer", "a rescued alien", "the medic", "her co-pilot"],
        places: &["the space station", "a frozen moon", "the cargo bay", "the bridge", "the asteroid belt", "a distant colony"],
        objects: &["a glowing crystal", "a broken beacon", "a star chart", "an oxygen tank", "a strange signal", "a plasma rifle"],
        creatures: &["alien", "robot", "swarm", "machine"],
        adjectives: &["silent", "metallic", "cold", "blinking", "endless", "damaged"],
        actions: &["flew toward", "docked at", "landed on", "orbited", "escaped from", "scanned"],
    },
    Genre {
        name: "desert",
        prompt: "A merchant discovers a lamp in the desert that holds a djinn.",
        heroes: &["the merchant", "a young camel driver", "the princess", "Karim", "the old guide", "a thief"],
        companions: &["his camel", "a wise woman", "the caravan master", "a lost child"],
        places: &["the oasis", "the sand dunes", "the bazaar", "the ruined temple", "the palace", "a hidden well"],
        objects: &["a brass lamp", "a flying carpet", "a bag of gold", "a jeweled dagger", "a scroll", "a water skin"],
        creatures: &["djinn", "scorpion", "sandworm", "vulture"],
        adjectives: &["burning", "golden", "dusty", "secret", "endless", "thirsty"],
        actions: &["crossed", "rode toward", "rested at", "traded at", "hid in", "prayed at"],
    },
    Genre {
        name: "mountain",
        prompt: "A shepherd must cross a frozen mountain pass before winter.",
        heroes: &["the shepherd", "a young climber", "the village elder", "Ana", "the blacksmith", "the teacher"],
        companions: &["a loyal dog", "the priest", "her grandfather", "a goat"],
        places: &["the mountain pass", "the village square", "the glacier", "a stone hut", "the high meadow", "the frozen lake"],
        objects: &["a wooden flute", "a warm blanket", "an ice axe", "a bell", "a bundle of herbs", "a lantern"],
        creatures: &["bear", "eagle", "yeti", "snow spirit"],
        adjectives: &["steep", "frozen", "peaceful", "white", "lonely", "thin"],
        actions: &["climbed", "descended into", "crossed", "waited at", "led the sheep across", "slept at"],
    },
    Genre {
        name: "castle",
        prompt: "A kitchen maid learns that the king is about to be poisoned.",
        heroes: &["the young king", "the knight", "a kitchen maid", "Sir Roland", "the queen", "the court jester"],
        companions: &["the old wizard", "his squire", "a loyal guard", "the princess"],
        places: &["the throne room", "the tower", "the dungeon", "the great hall", "the castle gate", "the royal stables"],
        objects: &["a crown", "a sword", "a sealed letter", "a poisoned cup", "a shield", "a ring"],
        creatures: &["dragon", "traitor", "ghost", "griffin"],
        adjectives: &["royal", "cruel", "noble", "golden", "cursed", "proud"],
        actions: &["rode to", "marched into", "guarded", "fled from", "knelt in", "feasted in"],
    },
    Genre {
        name: "haunted",
        prompt: "A family moves into a house where something lives in the attic.",
        heroes: &["the new owner", "a curious boy", "the caretaker", "Lucy", "the young priest", "a skeptical writer"],
        companions: &["her sister", "the old butler", "a black cat", "the neighbor"],
        places: &["the attic", "the empty house", "the cellar", "the graveyard", "the long hallway", "the nursery"],
        objects: &["a cracked mirror", "a music box", "a diary", "a candle", "a rusty key", "a doll"],
        creatures: &["ghost", "shadow", "spirit", "bat"],
        adjectives: &["cold", "dusty", "whispering", "pale", "creaking", "dark"],
        actions: &["crept into", "stared at", "listened at", "ran out of", "locked", "explored"],
    },
    Genre {
        name: "farm",
        prompt: "A farmer finds a talking animal in the barn.",
        heroes: &["the farmer", "a little boy", "the farmer's wife", "Old Ben", "the milkmaid", "the scarecrow"],
        companions: &["the pig", "a clever hen", "the horse", "his uncle"],
        places: &["the barn", "the wheat field", "the orchard", "the pond", "the market", "the farmhouse"],
        objects: &["a basket of eggs", "a pitchfork", "a bucket of milk", "a prize pumpkin", "a straw hat", "a tractor"],
        creatures: &["fox", "cow", "goose", "rooster"],
        adjectives: &["muddy", "sunny", "sleepy", "ripe", "green", "busy"],
        actions: &["worked in", "walked to", "plowed", "sold apples at", "fed the animals in", "fixed the fence near"],
    },
    Genre {
        name: "war",
        prompt: "A young soldier carries a letter that must reach home.",
        heroes: &["the sergeant", "a young soldier", "the scout", "Private Hale", "the nurse", "the colonel"],
        companions: &["his best friend", "the radio operator", "a local farmer", "the chaplain"],
        places: &["the trenches", "the river crossing", "the burned village", "the bunker", "the frontier fort", "the field hospital"],
        objects: &["a letter from home", "a rifle", "a medal", "a photograph", "a helmet", "a map of the front"],
        creatures: &["enemy", "sniper", "tank", "horse"],
        adjectives: &["exhausted", "bloody", "silent", "weary", "brave", "ruined"],
        actions: &["marched to", "defended", "crawled toward", "retreated from", "held", "waited in"],
    },
];

const TIMES: &[&str] = &[
    "at dawn", "that night", "in the morning", "before the storm", "later", "after many years", "at midnight",
    "one winter", "the next day", "by evening",
];
const FEELINGS: &[&str] = &["afraid", "happy", "tired", "brave", "lonely", "angry", "calm", "hopeful", "sad", "proud"];
const WEATHER: &[&str] = &["rain", "storm", "fog", "snow", "wind", "heat"];
const UNTIL: &[&str] = &["nightfall", "the moon rose", "morning came", "the bells rang", "the rain stopped"];

const OPENINGS: &[&str] = &[
    "once upon a time {hero} lived near {place}.",
    "long ago in {place} there was {hero} who dreamed of {object}.",
    "{time} {hero} woke up and went to {place}.",
    "nobody believed {hero} when the story of {object} began.",
    "it was {weather} when {hero} first saw {place}.",
    "{hero} had always been {feeling} about {place}.",
];

const BODY: &[&str] = &[
    "{hero} {action} {place}.",
    "at {place} {hero} found {object}.",
    "the {adj} {creature} watched from {place}.",
    "{companion} said that {object} was {adj}.",
    "{time} the {weather} came over {place}.",
    "{hero} felt {feeling} and held {object} close.",
    "nobody in {place} had seen {object} before.",
    "{companion} warned {hero} about the {creature}.",
    "they walked together through {place} until {until}.",
    "{hero} asked {companion} why the {creature} was so {adj}.",
    "the {creature} took {object} and ran toward {place}.",
    "when the {weather} came {hero} hid inside {place}.",
    "{hero} remembered an old song about {object}.",
    "there was a {adj} light above {place}.",
    "{companion} laughed but {hero} did not.",
    "for three days {hero} searched {place} for {object}.",
    "{hero} {action} {place} and then {action} {place}.",
    "by the end of the day {hero} was {feeling}.",
    "{object} began to glow in the {adj} dark.",
    "{hero} promised {companion} to come back with {object}.",
    "{other} told {hero} a story about the {adj} {creature}.",
    "the road to {place} was long and {adj}.",
    "{hero} gave {object} to {companion}.",
    "{time} {companion} {action} {place} alone.",
    "the {creature} was {adj} and {adj}.",
    "{hero} heard a voice from {place}.",
    "{companion} was {feeling} because {object} was gone.",
    "{hero} did not know what to do with {object}.",
    "suddenly the {creature} appeared at {place}.",
    "{hero} and {companion} {action} {place}.",
];

const CLOSINGS: &[&str] = &[
    "and so {hero} came home with {object} and was {feeling} at last.",
    "{hero} never spoke of {place} again.",
    "that is how {place} got its name.",
    "from that day on the {creature} guarded {place}.",
    "in the end {hero} and {companion} were {feeling} together.",
    "{hero} kept {object} for the rest of a long life.",
];

/// Probability that a slot draws from a different genre's word list.
const CROSS_GENRE: f64 = 0.15;

struct StoryState<'a> {
    genre: &'a Genre,
    hero: &'static str,
    companion: &'static str,
}

/// Zipf-weighted choice: the item at rank `r` (from 1) has weight `1/r`, so
/// every list has a clear favourite and a long tail.
fn pick(rng: &mut ChaCha8Rng, list: &'static [&'static str]) -> &'static str {
    let total: f64 = (1..=list.len()).map(|r| 1.0 / r as f64).sum();
    let mut u = rng.random::<f64>() * total;
    for (i, item) in list.iter().enumerate() {
        u -= 1.0 / (i + 1) as f64;
        if u < 0.0 {
            return item;
        }
    }
    list[list.len() - 1]
}

fn slot(rng: &mut ChaCha8Rng, st: &StoryState<'_>, name: &str) -> &'static str {
    let g = if rng.random_bool(CROSS_GENRE) {
        GENRES.choose(rng).expect("genres")
    } else {
        st.genre
    };
    match name {
        "hero" => st.hero,
        "companion" => st.companion,
        "other" => pick(rng, g.heroes),
        "place" => pick(rng, g.places),
        "object" => pick(rng, g.objects),
        "creature" => pick(rng, g.creatures),
        "adj" => pick(rng, g.adjectives),
        "action" => pick(rng, g.actions),
        "time" => pick(rng, TIMES),
        "feeling" => pick(rng, FEELINGS),
        "weather" => pick(rng, WEATHER),
        "until" => pick(rng, UNTIL),
        _ => unreachable!("unknown slot {name}"),
    }
}

fn fill(rng: &mut ChaCha8Rng, st: &StoryState<'_>, template: &str) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('}').expect("closed slot") + open;
        out.push_str(slot(rng, st, &rest[open + 1..close]));
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    let mut chars = out.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => out,
    }
}

/// One story in the given genre: an opening, four to ten body sentences and
/// a closing.
pub fn story(genre: &Genre, rng: &mut ChaCha8Rng) -> String {
    let st = StoryState {
        genre,
        hero: pick(rng, genre.heroes),
        companion: pick(rng, genre.companions),
    };
    let opening = pick(rng, OPENINGS);
    let mut sentences = vec![fill(rng, &st, opening)];
    for _ in 0..rng.random_range(4..=10) {
        let t = pick(rng, BODY);
        sentences.push(fill(rng, &st, t));
    }
    let closing = pick(rng, CLOSINGS);
    sentences.push(fill(rng, &st, closing));
    sentences.join(" ")
}

/// Stories cycling through every genre until at least `min_tokens`
/// whitespace tokens have been produced.
pub fn training_corpus(seed: u64, min_tokens: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tokens = 0;
    while tokens < min_tokens {
        let s = story(&GENRES[out.len() % GENRES.len()], &mut rng);
        tokens += s.split_whitespace().count();
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_large_enough() {
        let a = training_corpus(3, 20_000);
        assert_eq!(a, training_corpus(3, 20_000));
        assert_ne!(a, training_corpus(4, 20_000));
        assert!(a.iter().map(|s| s.split_whitespace().count()).sum::<usize>() >= 20_000);
    }

    #[test]
    fn stories_have_no_unfilled_slots() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in GENRES {
            let s = story(g, &mut rng);
            assert!(!s.contains('{') && !s.contains('}'), "{s}");
            assert!(s.chars().next().unwrap().is_uppercase());
            assert!(s.ends_with('.'));
        }
    }
}
