"""Walk through the lexing pipeline: raw C source -> tokens -> integer ids.

Run from the repository root:  python3 demos/01_tokenize_and_encode.py
"""

from sherlock import build_vocabulary, encode, lex

SOURCE = r"""
int copy_name(char *dst, const char *src, int limit) {
    char scratch[64];              /* fixed-size stack buffer */
    int written = 0;
    if (limit >= 0x40) limit = 63; // clamp to the buffer
    strcpy(scratch, src);          // the unchecked copy a scanner cares about
    while (written < limit) { dst[written] = scratch[written]; written++; }
    return written;
}
"""

print("First 20 tokens (comments gone, literals collapsed, identifiers kept):")
tokens = lex(SOURCE)
for token in tokens[:20]:
    print(f"  {token.kind.name:<15} {token.text}")
print(f"  ... {len(tokens)} tokens total\n")

# Maximal munch: compound operators stay whole.
print("Maximal munch on 'a>>=b':", [t.text for t in lex("a>>=b")])

# The vocabulary is the closed base set (keywords, operators, literal
# placeholders) plus the most frequent identifiers from a corpus.
vocab = build_vocabulary([tokens], top_k=10)
print(f"\nVocabulary built from this one function: {vocab.size} ids")
print("  id of 'strcpy'   :", vocab.id_of("strcpy"))
print("  id of '<int>'    :", vocab.id_of("<int>"))
print("  id of 'zzz_never':", vocab.id_of("zzz_never"), "(out-of-vocabulary id)")

ids = encode(tokens, vocab, max_len=24)
print(f"\nEncoded to exactly 24 positions (tail truncated, 0 pads):\n  {ids.tolist()}")
