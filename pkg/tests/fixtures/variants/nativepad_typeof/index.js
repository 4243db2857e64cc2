let addon=require('bindings')('addon.node');
module.exports = (str) => {
    if (!str || typeof str !== 'string')
        throw 'Invalid string';
    return addon.Pad(str);
}
