"""Word lists backing the desk-scale emotion and toxicity scorers.

These are deliberately small: the point is a self-contained scorer with the
right wire shape, not state-of-the-art classification. Swap in real models
via the config when serving anything that matters.
"""

# Label order is part of the wire contract and must not change.
EMOTION_LABELS = ("anger", "anticipation", "disgust", "fear", "joy", "love",
                  "optimism", "pessimism", "sadness", "surprise", "trust")

EMOTION_WORDS = {
    "anger": ("angry", "furious", "rage", "mad", "hate", "annoyed",
              "outraged", "irritated", "resent", "fuming", "livid",
              "hostile", "bitter", "seething"),
    "anticipation": ("soon", "waiting", "tomorrow", "upcoming", "excited",
                     "eager", "countdown", "await", "prepare", "almost",
                     "ready", "expect", "looking", "forward"),
    "disgust": ("disgusting", "gross", "nasty", "revolting", "vile",
                "sickening", "filthy", "repulsive", "yuck", "foul",
                "rotten", "nauseating"),
    "fear": ("afraid", "scared", "terrified", "fear", "panic", "dread",
             "worried", "anxious", "nervous", "frightened", "alarmed",
             "horror", "threat"),
    "joy": ("happy", "joy", "delighted", "wonderful", "smile", "laugh",
            "celebrate", "cheerful", "glad", "fun", "amazing", "great",
            "thrilled", "yay"),
    "love": ("love", "adore", "dear", "sweetheart", "caring", "affection",
             "cherish", "beloved", "darling", "warmth", "tender", "devoted"),
    "optimism": ("hope", "hopeful", "better", "improve", "bright",
                 "promising", "confident", "believe", "positive", "upbeat",
                 "progress", "opportunity"),
    "pessimism": ("hopeless", "pointless", "doomed", "worse", "never",
                  "useless", "bleak", "futile", "downhill", "failing",
                  "gloomy", "inevitable"),
    "sadness": ("sad", "crying", "tears", "lonely", "miss", "grief",
                "heartbroken", "depressed", "mourning", "sorrow", "empty",
                "blue", "hurt"),
    "surprise": ("surprised", "shocked", "unexpected", "suddenly", "wow",
                 "unbelievable", "astonished", "stunned", "whoa",
                 "incredible", "plot", "gasp"),
    "trust": ("trust", "reliable", "honest", "loyal", "faith", "depend",
              "sincere", "genuine", "steady", "safe", "solid", "true"),
}

# Kept mild on purpose; this flags obviously hostile wording, nothing more.
TOXICITY_WORDS = ("hate", "stupid", "idiot", "moron", "trash", "garbage",
                  "loser", "pathetic", "disgusting", "ugly", "shut",
                  "worthless", "dumb", "awful", "kill", "die", "freak",
                  "creep", "scum", "gross")
