// Print the reference compiler's storage layout for the last contract in each file.
// usage: node solc_layout.js a.sol [b.sol ...]  -> {"a.sol": {storage, types}, ...}
const fs = require('fs');
const path = require('path');
const solc = require('solc');

const result = {};
for (const file of process.argv.slice(2)) {
  const content = fs.readFileSync(file, 'utf8');
  const names = [...content.matchAll(/^\s*(?:abstract\s+)?contract\s+(\w+)/gm)].map(m => m[1]);
  const input = {
    language: 'Solidity',
    sources: { [path.basename(file)]: { content } },
    settings: { outputSelection: { '*': { '*': ['storageLayout'] } } },
  };
  const out = JSON.parse(solc.compile(JSON.stringify(input)));
  const errors = (out.errors || []).filter(e => e.severity === 'error');
  if (errors.length) {
    console.error(errors.map(e => e.formattedMessage).join('\n'));
    process.exit(1);
  }
  const layout = out.contracts[path.basename(file)][names[names.length - 1]].storageLayout;
  for (const entry of layout.storage) { delete entry.astId; delete entry.contract; }
  for (const t of Object.values(layout.types || {})) {
    for (const m of t.members || []) { delete m.astId; delete m.contract; }
  }
  result[path.basename(file)] = layout;
}
process.stdout.write(JSON.stringify(result, null, 2) + '\n');
