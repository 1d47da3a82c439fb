#!/usr/bin/env python3
"""Regenerates the synthetic instances of the test corpus.

Usage: tools/gen_corpus.py [output_dir]   (default tests/data)
"""
import sys
import random

OUT=sys.argv[1] if len(sys.argv)>1 else "tests/data"
def write(name, rows, cols, sense_of, rhs, ranges=None, bounds=None, ints=set(), objective=None, pairs_per_line=2):
    lines=[f"NAME {name}","ROWS"," N  obj"]
    for r in rows: lines.append(f" {sense_of[r]}  {r}")
    lines.append("COLUMNS")
    in_int=False; m=0
    for c,entries in cols:
        want=c in ints
        if want!=in_int:
            tag="'INTORG'" if want else "'INTEND'"
            lines.append(f"    M{m}  'MARKER'  {tag}"); m+=1; in_int=want
        es=list(entries)
        if (objective and objective.get(c)) or not es: es=[("obj",(objective or {}).get(c,0))]+es
        for k in range(0,len(es),pairs_per_line):
            chunk=es[k:k+pairs_per_line]
            lines.append("    "+c+"  "+"  ".join(f"{r}  {v:g}" for r,v in chunk))
    if in_int: lines.append(f"    M{m}  'MARKER'  'INTEND'")
    lines.append("RHS")
    for r,v in rhs.items():
        if v!=0: lines.append(f"    RHS  {r}  {v:g}")
    if ranges:
        lines.append("RANGES")
        for r,v in ranges.items(): lines.append(f"    RNG  {r}  {v:g}")
    lines.append("BOUNDS")
    for b in bounds or []: lines.append(" "+b)
    lines.append("ENDATA")
    open(f"{OUT}/{name}.mps","w").write("\n".join(lines)+"\n")

def build(name, seed, nb, nc, m, kind):
    """Rows are built around a random anchor point, so every instance is feasible."""
    rng=random.Random(seed)
    cols={f"x{j}":[] for j in range(nb)}
    cols.update({f"y{j}":[] for j in range(nc)})
    names=list(cols)
    ub={f"y{j}":rng.randint(1,20) for j in range(nc)}
    anchor={f"x{j}":0 for j in range(nb)}
    anchor.update({c:rng.randint(0,u) for c,u in ub.items()})
    sense={}; rhs={}; ranges={}
    for i in range(m):
        r=f"r{i}"
        if kind=="setpack" or (kind=="mixed" and rng.random()<0.3):
            vs=rng.sample(range(nb), rng.randint(2,6))
            for j in vs: cols[f"x{j}"].append((r,1))
            if sum(anchor[f"x{j}"] for j in vs)==0 and rng.random()<0.5:
                anchor[f"x{rng.choice(vs)}"]=1
            sense[r]="L"; rhs[r]=1
            continue
        if kind=="cover":
            vs=rng.sample(range(nb), rng.randint(3,8))
            need=rng.randint(1,2)
            for j in vs: cols[f"x{j}"].append((r,1))
            for j in rng.sample(vs,need): anchor[f"x{j}"]=1
            sense[r]="G"; rhs[r]=need
            continue
        vs=rng.sample(names, rng.randint(2,min(8,len(names))))
        terms=[]
        for c in vs:
            a=rng.choice([-3,-2,-1,1,2,3,4,5]) if c.startswith("x") else rng.choice([-1.5,-0.5,0.5,2.25])
            cols[c].append((r,a)); terms.append((c,a))
        sense[r]=rng.choice("LLLGE")
        rhs[r]=terms
        if sense[r]=="L" and rng.random()<0.15: ranges[r]=rng.randint(2,6)
    # Knapsack-style rows get their right-hand side once the anchor is final.
    for r,v in list(rhs.items()):
        if not isinstance(v,list): continue
        act=sum(a*anchor[c] for c,a in v)
        slack=rng.randint(0,3)
        rhs[r]=act+slack if sense[r]=="L" else act-slack if sense[r]=="G" else act
        if r in ranges: ranges[r]=max(ranges[r],slack)
    for c in cols: cols[c].sort(key=lambda e:int(e[0][1:]))
    obj={c:rng.randint(-9,9) for c in names}
    bounds=[f"BV BND  x{j}" for j in range(nb)]
    for j in range(nc):
        bounds.append(f"UP BND  y{j}  {ub[f'y{j}']}")
        if rng.random()<0.3: bounds.append(f"LO BND  y{j}  -{rng.randint(0,5)}")
    write(name, [f"r{i}" for i in range(m)], list(cols.items()), sense, rhs, ranges, bounds, {f"x{j}" for j in range(nb)}, obj, pairs_per_line=rng.choice([1,2]))

build("setpack_40x60",1,60,0,40,"setpack")
build("cover_35x50",2,50,0,35,"cover")
build("mixed_knap_30x45",3,35,10,30,"mixed")
build("mixed_knap_60x90",4,80,10,60,"mixed")
build("knapsack_rows_25",5,30,5,25,"knap")
build("mixed_sparse_120",6,120,20,100,"mixed")
