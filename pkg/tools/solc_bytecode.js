// Print creation bytecode of the last contract in each file.
// usage: node solc_bytecode.js a.sol [b.sol ...]  -> {"a.sol": "0x6080...", ...}
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
    settings: {
      optimizer: { enabled: false },
      evmVersion: 'paris',  // no initcode size cap, so long constructors deploy
      outputSelection: { '*': { '*': ['evm.bytecode.object'] } },
    },
  };
  const out = JSON.parse(solc.compile(JSON.stringify(input)));
  const errors = (out.errors || []).filter(e => e.severity === 'error');
  if (errors.length) {
    console.error(errors.map(e => e.formattedMessage).join('\n'));
    process.exit(1);
  }
  result[path.basename(file)] = '0x' + out.contracts[path.basename(file)][names[names.length - 1]].evm.bytecode.object;
}
process.stdout.write(JSON.stringify(result, null, 2) + '\n');
