# Independent reference for the seeded xoshiro256** streams.
M = (1 << 64) - 1
def fnv1a(s):
    h = 0xcbf29ce484222325
    for c in s.encode():
        h ^= c; h = (h * 0x100000001b3) & M
    return h
def splitmix(state):
    state = (state + 0x9e3779b97f4a7c15) & M
    z = state
    z = ((z ^ (z >> 30)) * 0xbf58476d1ce4e5b9) & M
    z = ((z ^ (z >> 27)) * 0x94d049bb133111eb) & M
    return state, z ^ (z >> 31)
def rotl(x, k): return ((x << k) | (x >> (64 - k))) & M
def stream(seed, label, index):
    st, z = splitmix(seed); st = z ^ fnv1a(label)
    st, z = splitmix(st); st = z ^ ((index * 0xd1342543de82ef95) & M)
    s = []
    for _ in range(4):
        st, z = splitmix(st); s.append(z)
    while True:
        r = (rotl((s[1] * 5) & M, 7) * 9) & M
        t = (s[1] << 17) & M
        s[2] ^= s[0]; s[3] ^= s[1]; s[1] ^= s[2]; s[0] ^= s[3]; s[2] ^= t; s[3] = rotl(s[3], 45)
        yield r
for args in [(42, "radio", 0), (1, "game", 3), (0, "", 0)]:
    g = stream(*args)
    vals = [next(g) for _ in range(3)]
    print(args, [hex(v) for v in vals], [(v >> 11) * 2.0**-53 for v in vals[:1]])
