// entry: Invoke
// category: different APIs (function cast)
#include <nan.h>

NAN_METHOD(Invoke) {
  v8::Local<v8::Function> cb = v8::Local<v8::Function>::Cast(info[1]);  // sink: tainted
  v8::Local<v8::Value> argv[1] = { Nan::New("done").ToLocalChecked() };  // sink: clean
  Nan::Call(cb, Nan::GetCurrentContext()->Global(), 1, argv);
}
