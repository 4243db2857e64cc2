module.exports = require('bindings')('direct.node');
