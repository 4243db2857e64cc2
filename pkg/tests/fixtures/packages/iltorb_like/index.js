'use strict';

const encode = require('./build/bindings/encode.node');

function compressSync(input, params) {
  if (!Buffer.isBuffer(input)) {
    throw new Error('Brotli input is not a buffer.');
  }
  params = params || {};
  return encode.compressSync(input, params);
}

module.exports = { compressSync };
