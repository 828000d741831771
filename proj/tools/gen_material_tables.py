import csv
def rows(p):
    with open(p) as f:
        r=csv.reader(f); next(r)
        return [tuple(x) for x in r]
out=['// Generated from data/gold_johnson_christy.csv and data/silicon.csv; keep in sync.',
     '#include "material_tables.hpp"','','namespace patchant::detail {','']
for name,p in [('kGoldJohnsonChristy','data/gold_johnson_christy.csv'),('kSiliconTable','data/silicon.csv')]:
    rs=rows(p)
    out.append('const std::array<TablePoint, %d> %s = {{'%(len(rs),name))
    for l,a,b in rs: out.append('    {%s, {%s, %s}},'%(l,a,b))
    out.append('}};'); out.append('')
out.append('}  // namespace patchant::detail')
open('src/material_tables.cpp','w').write('\n'.join(out)+'\n')
print(len(rows('data/gold_johnson_christy.csv')), len(rows('data/silicon.csv')))
